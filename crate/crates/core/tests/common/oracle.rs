//! Spreadsheet-style re-evaluation of the slot models, written against the
//! tabulated coefficients only. Shares no code with the library.

#![allow(dead_code)]

/// (rho in MB, downtime slope SM-MR, downtime slope SM-MD, duration slope SM-MD)
pub const SM_SLOPES: [(f64, f64, f64, f64); 3] = [
    (1.0, 10.55, 5.74, 20.28),
    (10.0, 11.73, 6.49, 23.02),
    (100.0, 23.3, 13.3, 48.2),
];

pub const SDL_DUR_SLOPE: f64 = 0.08;
pub const SDL_DUR_INTERCEPT: f64 = 4.27;

pub const SM_CPU: [f64; 2] = [0.40, 0.76];
pub const SM_E: [f64; 2] = [17.87, 27.56];

/// q for E, CPU, MEM, DISK.
pub const IDLE: [f64; 4] = [120.0, 0.1, 5.7, 3.2];

/// Per class: SDL slopes (E, CPU, MEM, DISK), intercepts, sigma in ms,
/// per-xApp load (E, CPU, MEM).
pub struct ClassRow {
    pub id: &'static str,
    pub slope: [f64; 4],
    pub intercept: [f64; 4],
    pub sigma_ms: f64,
    pub load: [f64; 3],
}

pub const CLASSES: [ClassRow; 4] = [
    ClassRow { id: "A", slope: [-0.18, -0.00, 0.04, 0.01], intercept: [32.35, 5.32, 0.20, 0.00], sigma_ms: 16.62, load: [3.43, 0.47, 0.52] },
    ClassRow { id: "B", slope: [-0.09, 0.03, 0.04, 0.01], intercept: [33.60, 5.57, 0.17, 0.00], sigma_ms: 17.07, load: [16.48, 2.86, 0.52] },
    ClassRow { id: "C", slope: [-0.10, -0.03, 0.02, 0.00], intercept: [35.48, 4.97, 1.82, 0.00], sigma_ms: 7.71, load: [3.43, 0.47, 0.52] },
    ClassRow { id: "D", slope: [-0.06, -0.01, 0.08, 0.03], intercept: [40.20, 5.00, 1.04, 0.00], sigma_ms: 11.62, load: [16.48, 2.86, 0.52] },
];

pub fn class(id: &str) -> &'static ClassRow {
    CLASSES.iter().find(|c| c.id == id).expect("reference class")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sdl,
    Mr,
    Md,
}

fn sm_row(rho_mb: f64) -> (f64, f64, f64, f64) {
    *SM_SLOPES.iter().find(|r| r.0 == rho_mb).expect("tabulated state size")
}

pub fn downtime(mode: Mode, rho_mb: f64, n: u32) -> f64 {
    let r = sm_row(rho_mb);
    match mode {
        Mode::Sdl => 0.0,
        Mode::Mr => r.1 * n as f64,
        Mode::Md => r.2 * n as f64,
    }
}

pub fn duration(mode: Mode, rho_mb: f64, n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    match mode {
        Mode::Sdl => SDL_DUR_SLOPE * n as f64 + SDL_DUR_INTERCEPT,
        Mode::Mr => sm_row(rho_mb).1 * n as f64,
        Mode::Md => sm_row(rho_mb).3 * n as f64,
    }
}

pub fn instantiation(n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        SDL_DUR_SLOPE * n as f64 + SDL_DUR_INTERCEPT
    }
}

/// Defrag downtime in seconds for `(class id, count)` pairs.
pub fn defrag(mix: &[(&str, u32)]) -> f64 {
    mix.iter().map(|(id, n)| class(id).sigma_ms / 1000.0 * *n as f64).sum()
}

/// Backend consumption per server for metric index `m` (0 = E).
pub fn sdl_share(mix: &[(&str, u32)], servers: usize, m: usize) -> f64 {
    let total: f64 = mix
        .iter()
        .map(|(id, n)| {
            let c = class(id);
            (c.slope[m] * *n as f64 + c.intercept[m]).max(0.0)
        })
        .sum();
    total / servers as f64
}

/// One cluster scenario: classes by id, flow tensor including the staging
/// row, activation.
pub struct Scenario<'a> {
    pub classes: &'a [&'a str],
    pub x: &'a [Vec<Vec<u32>>],
    pub mu: &'a [bool],
    pub mode: Mode,
    pub rho_mb: f64,
    pub slot: f64,
}

impl Scenario<'_> {
    fn servers(&self) -> usize {
        self.mu.len()
    }

    fn totals(&self) -> Vec<(&str, u32)> {
        self.classes
            .iter()
            .enumerate()
            .map(|(k, id)| (*id, self.x[k].iter().flatten().sum()))
            .collect()
    }

    fn column(&self, k: usize, s: usize) -> u32 {
        self.x[k].iter().map(|row| row[s]).sum()
    }

    fn outgoing(&self, k: usize, s: usize) -> u32 {
        (0..self.servers()).filter(|&t| t != s).map(|t| self.x[k][s][t]).sum()
    }

    fn initial(&self, k: usize, s: usize) -> u32 {
        self.x[k][s].iter().sum()
    }

    pub fn server_energy(&self, s: usize) -> f64 {
        let staging = self.servers();
        let mut window = 0.0;
        let mut migration_time = 0.0;
        let mut p0 = 0.0;
        let mut pf = 0.0;
        for (k, id) in self.classes.iter().enumerate() {
            let pe = class(id).load[0];
            let out = self.outgoing(k, s);
            let d = duration(self.mode, self.rho_mb, out);
            migration_time += d;
            window += d + instantiation(self.x[k][staging][s]);
            p0 += pe * self.initial(k, s) as f64;
            pf += pe * self.column(k, s) as f64;
        }
        let mu = if self.mu[s] { 1.0 } else { 0.0 };
        let strategy_energy = match self.mode {
            Mode::Sdl => mu * self.slot * sdl_share(&self.totals(), self.servers(), 0),
            Mode::Mr => SM_E[0] * migration_time,
            Mode::Md => SM_E[1] * migration_time,
        };
        strategy_energy + window * (IDLE[0] + p0) + (self.slot - window) * (mu * IDLE[0] + pf)
    }

    pub fn energy(&self) -> f64 {
        (0..self.servers()).map(|s| self.server_energy(s)).sum()
    }

    /// CPU cores used on `s` at slot end.
    pub fn cpu(&self, s: usize) -> f64 {
        if !self.mu[s] {
            return 0.0;
        }
        let mut v = IDLE[1];
        for (k, id) in self.classes.iter().enumerate() {
            v += class(id).load[1] * self.column(k, s) as f64;
        }
        let participates = (0..self.classes.len()).any(|k| self.outgoing(k, s) > 0);
        v += match self.mode {
            Mode::Sdl => sdl_share(&self.totals(), self.servers(), 1),
            Mode::Mr if participates => SM_CPU[0],
            Mode::Md if participates => SM_CPU[1],
            _ => 0.0,
        };
        v.max(0.0)
    }
}

/// Flow tensor where every xApp stays put.
pub fn stay(counts: &[Vec<u32>]) -> Vec<Vec<Vec<u32>>> {
    counts
        .iter()
        .map(|row| {
            let n = row.len();
            let mut m = vec![vec![0; n + 1]; n + 1];
            for (s, &c) in row.iter().enumerate() {
                m[s][s] = c;
            }
            m
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
