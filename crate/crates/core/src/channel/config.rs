use crate::error::{Error, Result};

/// Which users share RIS-side paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Every user shares `common_columns` arrival frequencies.
    One,
    /// Users fall into random clusters; sharing happens only within and between
    /// neighbouring clusters.
    Two,
}

impl Scenario {
    pub fn as_number(self) -> u8 {
        match self {
            Scenario::One => 1,
            Scenario::Two => 2,
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(Scenario::One),
            "2" | "two" => Ok(Scenario::Two),
            other => Err(Error::InvalidConfig {
                field: "scenario",
                reason: format!("expected 1 or 2, got `{other}`"),
            }),
        }
    }
}

/// Dimensioning and propagation parameters for one simulated system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub bs_rows: usize,
    pub bs_cols: usize,
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub users: usize,
    pub pilots: usize,
    pub paths_bs_ris: usize,
    pub paths_ris_user: usize,
    pub common_columns: usize,
    pub clusters: usize,
    /// Probability that two neighbouring clusters share extra frequencies (scenario two).
    pub cross_share_prob: f64,
    pub snr_db: f64,
    pub dist_bs_ris: f64,
    pub dist_ris_user: f64,
    pub exp_bs_ris: f64,
    pub exp_ris_user: f64,
    pub scenario: Scenario,
    pub seed: u64,
}

impl Default for SystemConfig {
    /// 8×8 BS array, 16×16 RIS, 16 users, 192 pilots, 5 + 10 paths, 0 dB.
    fn default() -> Self {
        Self {
            bs_rows: 8,
            bs_cols: 8,
            ris_rows: 16,
            ris_cols: 16,
            users: 16,
            pilots: 192,
            paths_bs_ris: 5,
            paths_ris_user: 10,
            common_columns: 4,
            clusters: 3,
            cross_share_prob: 0.5,
            snr_db: 0.0,
            dist_bs_ris: 10.0,
            dist_ris_user: 100.0,
            exp_bs_ris: 2.2,
            exp_ris_user: 2.8,
            scenario: Scenario::One,
            seed: 0,
        }
    }
}

impl SystemConfig {
    /// Reduced dimensions (4×4 BS, 8×8 RIS, 8 users, 96 pilots) for fast experiments.
    pub fn desk() -> Self {
        Self::default().with_desk_dimensions()
    }

    pub fn with_desk_dimensions(mut self) -> Self {
        self.bs_rows = 4;
        self.bs_cols = 4;
        self.ris_rows = 8;
        self.ris_cols = 8;
        self.users = 8;
        self.pilots = 96;
        self
    }

    pub fn with_full_dimensions(mut self) -> Self {
        let d = Self::default();
        self.bs_rows = d.bs_rows;
        self.bs_cols = d.bs_cols;
        self.ris_rows = d.ris_rows;
        self.ris_cols = d.ris_cols;
        self.users = d.users;
        self.pilots = d.pilots;
        self
    }

    pub fn bs_antennas(&self) -> usize {
        self.bs_rows * self.bs_cols
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    /// Variance of a BS-RIS path gain, `10⁻³ d^-exp`.
    pub fn bs_ris_gain_variance(&self) -> f64 {
        1e-3 * self.dist_bs_ris.powf(-self.exp_bs_ris)
    }

    pub fn ris_user_gain_variance(&self) -> f64 {
        1e-3 * self.dist_ris_user.powf(-self.exp_ris_user)
    }

    /// Field names accepted by [`SystemConfig::set`], in [`SystemConfig::entries`] order.
    pub const KEYS: [&'static str; 18] = [
        "bs_rows",
        "bs_cols",
        "ris_rows",
        "ris_cols",
        "users",
        "pilots",
        "paths_bs_ris",
        "paths_ris_user",
        "common_columns",
        "clusters",
        "cross_share_prob",
        "snr_db",
        "dist_bs_ris",
        "dist_ris_user",
        "exp_bs_ris",
        "exp_ris_user",
        "scenario",
        "seed",
    ];

    /// Sets one field from its textual value. Returns `Ok(false)` for an unknown key.
    ///
    /// `snr_db` accepts `inf` for noiseless observations.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let Some(&field) = Self::KEYS.iter().find(|k| **k == key) else {
            return Ok(false);
        };
        let v = value.trim();
        let int = || -> Result<usize> {
            v.parse().map_err(|_| Error::InvalidConfig {
                field,
                reason: format!("expected a nonnegative integer, got `{v}`"),
            })
        };
        let real = || -> Result<f64> {
            v.parse().map_err(|_| Error::InvalidConfig {
                field,
                reason: format!("expected a number, got `{v}`"),
            })
        };
        match field {
            "bs_rows" => self.bs_rows = int()?,
            "bs_cols" => self.bs_cols = int()?,
            "ris_rows" => self.ris_rows = int()?,
            "ris_cols" => self.ris_cols = int()?,
            "users" => self.users = int()?,
            "pilots" => self.pilots = int()?,
            "paths_bs_ris" => self.paths_bs_ris = int()?,
            "paths_ris_user" => self.paths_ris_user = int()?,
            "common_columns" => self.common_columns = int()?,
            "clusters" => self.clusters = int()?,
            "cross_share_prob" => self.cross_share_prob = real()?,
            "snr_db" => self.snr_db = real()?,
            "dist_bs_ris" => self.dist_bs_ris = real()?,
            "dist_ris_user" => self.dist_ris_user = real()?,
            "exp_bs_ris" => self.exp_bs_ris = real()?,
            "exp_ris_user" => self.exp_ris_user = real()?,
            "scenario" => self.scenario = v.parse()?,
            "seed" => {
                self.seed = v.parse().map_err(|_| Error::InvalidConfig {
                    field,
                    reason: format!("expected an unsigned 64-bit integer, got `{v}`"),
                })?
            }
            _ => unreachable!("key list and match arms disagree"),
        }
        Ok(true)
    }

    /// Every field as `(key, value)` text that [`SystemConfig::set`] parses back exactly.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let values = [
            self.bs_rows.to_string(),
            self.bs_cols.to_string(),
            self.ris_rows.to_string(),
            self.ris_cols.to_string(),
            self.users.to_string(),
            self.pilots.to_string(),
            self.paths_bs_ris.to_string(),
            self.paths_ris_user.to_string(),
            self.common_columns.to_string(),
            self.clusters.to_string(),
            self.cross_share_prob.to_string(),
            self.snr_db.to_string(),
            self.dist_bs_ris.to_string(),
            self.dist_ris_user.to_string(),
            self.exp_bs_ris.to_string(),
            self.exp_ris_user.to_string(),
            self.scenario.as_number().to_string(),
            self.seed.to_string(),
        ];
        Self::KEYS.into_iter().zip(values).collect()
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidConfig {
                field,
                reason: reason.into(),
            })
        }
        for (field, v) in [
            ("bs_rows", self.bs_rows),
            ("bs_cols", self.bs_cols),
            ("ris_rows", self.ris_rows),
            ("ris_cols", self.ris_cols),
            ("users", self.users),
            ("pilots", self.pilots),
            ("paths_bs_ris", self.paths_bs_ris),
            ("paths_ris_user", self.paths_ris_user),
        ] {
            if v == 0 {
                return bad(field, "must be at least 1");
            }
        }
        let m = self.bs_antennas();
        let n = self.ris_elements();
        if self.paths_bs_ris > m {
            return bad("paths_bs_ris", format!("{} exceeds BS antennas {m}", self.paths_bs_ris));
        }
        if self.paths_bs_ris > n {
            return bad("paths_bs_ris", format!("{} exceeds RIS elements {n}", self.paths_bs_ris));
        }
        if self.paths_ris_user > n {
            return bad(
                "paths_ris_user",
                format!("{} exceeds RIS elements {n}", self.paths_ris_user),
            );
        }
        if self.common_columns > self.paths_ris_user {
            return bad(
                "common_columns",
                format!("{} exceeds paths_ris_user {}", self.common_columns, self.paths_ris_user),
            );
        }
        if self.scenario == Scenario::Two {
            if self.clusters == 0 {
                return bad("clusters", "scenario two needs at least one cluster");
            }
            if self.clusters > self.users {
                return bad(
                    "clusters",
                    format!("{} clusters cannot all be nonempty with {} users", self.clusters, self.users),
                );
            }
        }
        if !(0.0..=1.0).contains(&self.cross_share_prob) {
            return bad("cross_share_prob", "must lie in [0, 1]");
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad("snr_db", "must be a number or +inf");
        }
        for (field, v) in [("dist_bs_ris", self.dist_bs_ris), ("dist_ris_user", self.dist_ris_user)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, "must be positive and finite");
            }
        }
        for (field, v) in [("exp_bs_ris", self.exp_bs_ris), ("exp_ris_user", self.exp_ris_user)] {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SystemConfig::default().validate().unwrap();
        SystemConfig::desk().validate().unwrap();
        let d = SystemConfig::default();
        assert_eq!((d.users, d.bs_antennas(), d.ris_elements(), d.pilots), (16, 64, 256, 192));
        assert_eq!((d.paths_bs_ris, d.paths_ris_user), (5, 10));
    }

    #[test]
    fn invariant_violations_name_field() {
        let mut c = SystemConfig::desk();
        c.common_columns = 11;
        match c.validate() {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "common_columns"),
            other => panic!("{other:?}"),
        }
        let mut c = SystemConfig::desk();
        c.pilots = 0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field: "pilots", .. })));
        let mut c = SystemConfig::desk();
        c.scenario = Scenario::Two;
        c.clusters = 9;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field: "clusters", .. })));
    }

    #[test]
    fn entries_round_trip() {
        let mut c = SystemConfig::desk();
        c.snr_db = f64::INFINITY;
        c.cross_share_prob = 0.1 + 0.2;
        c.scenario = Scenario::Two;
        c.seed = u64::MAX;
        let mut back = SystemConfig::default();
        for (k, v) in c.entries() {
            assert!(back.set(k, &v).unwrap());
        }
        assert_eq!(back, c);
        assert!(!back.set("nonsense", "1").unwrap());
        assert!(matches!(back.set("users", "-3"), Err(Error::InvalidConfig { field: "users", .. })));
        assert!(back.set("scenario", "3").is_err());
    }

    #[test]
    fn gain_variances() {
        let d = SystemConfig::default();
        assert!((d.bs_ris_gain_variance() - 1e-3 * 10f64.powf(-2.2)).abs() < 1e-18);
        assert!((d.ris_user_gain_variance() - 1e-3 * 100f64.powf(-2.8)).abs() < 1e-20);
    }
}
