//! Closed-form per-run operation counts of the hybrid-field estimators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComplexityScheme {
    HfOmpWithGamma,
    HfOmpWithoutGamma,
    HfSdOmp,
    HfSgpWithGamma,
    HfSgpWithoutGamma,
    EpsOmpSsigw,
}

impl ComplexityScheme {
    pub const ALL: [ComplexityScheme; 6] = [
        ComplexityScheme::HfOmpWithGamma,
        ComplexityScheme::HfOmpWithoutGamma,
        ComplexityScheme::HfSdOmp,
        ComplexityScheme::HfSgpWithGamma,
        ComplexityScheme::HfSgpWithoutGamma,
        ComplexityScheme::EpsOmpSsigw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ComplexityScheme::HfOmpWithGamma => "hf-omp-gamma",
            ComplexityScheme::HfOmpWithoutGamma => "hf-omp-no-gamma",
            ComplexityScheme::HfSdOmp => "hf-sd-omp",
            ComplexityScheme::HfSgpWithGamma => "hf-sgp-gamma",
            ComplexityScheme::HfSgpWithoutGamma => "hf-sgp-no-gamma",
            ComplexityScheme::EpsOmpSsigw => "eps-omp-ssigw",
        }
    }
}

impl fmt::Display for ComplexityScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComplexityScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComplexityScheme::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Formula inputs; each scheme reads only the ones it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub n: Option<f64>,
    pub l: Option<f64>,
    pub l_f: Option<f64>,
    pub l_n: Option<f64>,
    pub q_f: Option<f64>,
    pub q_n: Option<f64>,
    /// Total dictionary size; defaults to `Q_F + Q_N` when absent.
    pub q: Option<f64>,
    /// Neighbor-cluster size of support detection.
    pub o: Option<f64>,
    /// Number of candidate far/near splits.
    pub n_gamma: Option<f64>,
    pub n_iter: Option<f64>,
    /// Mean backtracking attempts per step search.
    pub b: Option<f64>,
    /// Outer iterations.
    pub i: Option<f64>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingParameter(name))
}

/// Evaluates one row of the complexity table.
pub fn complexity_eval(scheme: ComplexityScheme, p: &ComplexityParams) -> Result<f64> {
    let n = need(p.n, "N")?;
    Ok(match scheme {
        ComplexityScheme::HfOmpWithGamma => {
            let (lf, ln) = (need(p.l_f, "L_F")?, need(p.l_n, "L_N")?);
            let (qf, qn) = (need(p.q_f, "Q_F")?, need(p.q_n, "Q_N")?);
            n * (qf * lf + lf * lf) + lf.powi(3) + n * (qn * ln + ln * ln) + ln.powi(3)
        }
        ComplexityScheme::HfOmpWithoutGamma => {
            let l = need(p.l, "L")?;
            let (qf, qn) = (need(p.q_f, "Q_F")?, need(p.q_n, "Q_N")?);
            let ng = need(p.n_gamma, "N_gamma")?;
            n * qf * l + n * l * l + l.powi(3) + ng * (n * qn + n * l * l + l.powi(3) + n * n * l)
        }
        ComplexityScheme::HfSdOmp => {
            let (lf, ln) = (need(p.l_f, "L_F")?, need(p.l_n, "L_N")?);
            let qn = need(p.q_n, "Q_N")?;
            let o = need(p.o, "O")?;
            n * lf * o * o + (lf * o).powi(2) + qn * (ln * o).powi(3) + n * qn
        }
        ComplexityScheme::HfSgpWithGamma => {
            let l = need(p.l, "L")?;
            let (qf, qn) = (need(p.q_f, "Q_F")?, need(p.q_n, "Q_N")?);
            n * l * l + n * l * (qf + qn)
        }
        ComplexityScheme::HfSgpWithoutGamma => {
            let l = need(p.l, "L")?;
            let (qf, qn) = (need(p.q_f, "Q_F")?, need(p.q_n, "Q_N")?);
            let ng = need(p.n_gamma, "N_gamma")?;
            let iters = need(p.n_iter, "N_iter")?;
            n * qf * l + n * l * l + ng * (n * qn + n * l * l) + iters * (n * n + n * l * l + l.powi(3) + n * n * l)
        }
        ComplexityScheme::EpsOmpSsigw => {
            let q = match p.q {
                Some(q) => q,
                None => need(p.q_f, "Q")? + need(p.q_n, "Q")?,
            };
            let i = need(p.i, "i")?;
            let b = need(p.b, "B")?;
            let iters = need(p.n_iter, "N_iter")?;
            i * n * (q + b * iters + 1.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn full() -> ComplexityParams {
        ComplexityParams {
            n: Some(256.0),
            l: Some(10.0),
            l_f: Some(5.0),
            l_n: Some(5.0),
            q_f: Some(256.0),
            q_n: Some(256.0),
            q: Some(512.0),
            o: Some(3.0),
            n_gamma: Some(11.0),
            n_iter: Some(5.0),
            b: Some(1.0),
            i: Some(10.0),
        }
    }

    #[test]
    fn proposed_row() {
        let p = full();
        assert_eq!(complexity_eval(ComplexityScheme::EpsOmpSsigw, &p).unwrap(), 1_326_080.0);
        let zero = ComplexityParams { i: Some(0.0), ..p };
        assert_eq!(complexity_eval(ComplexityScheme::EpsOmpSsigw, &zero).unwrap(), 0.0);
        let implicit_q = ComplexityParams { q: None, ..p };
        assert_eq!(complexity_eval(ComplexityScheme::EpsOmpSsigw, &implicit_q).unwrap(), 1_326_080.0);
    }

    #[test]
    fn sgp_with_gamma_row() {
        assert_eq!(complexity_eval(ComplexityScheme::HfSgpWithGamma, &full()).unwrap(), 1_336_320.0);
    }

    #[test]
    fn remaining_rows_by_hand() {
        let p = full();
        // 256(256·5 + 25) + 125, twice
        let omp = 2.0 * (256.0 * (1280.0 + 25.0) + 125.0);
        assert_eq!(complexity_eval(ComplexityScheme::HfOmpWithGamma, &p).unwrap(), omp);
        let no_gamma = 256.0 * 2560.0 + 25600.0 + 1000.0 + 11.0 * (65536.0 + 25600.0 + 1000.0 + 655360.0);
        assert_eq!(complexity_eval(ComplexityScheme::HfOmpWithoutGamma, &p).unwrap(), no_gamma);
        let sd = 256.0 * 5.0 * 9.0 + 225.0 + 256.0 * 3375.0 + 65536.0;
        assert_eq!(complexity_eval(ComplexityScheme::HfSdOmp, &p).unwrap(), sd);
        let sgp = 256.0 * 2560.0 + 25600.0 + 11.0 * (65536.0 + 25600.0) + 5.0 * (65536.0 + 25600.0 + 1000.0 + 655360.0);
        assert_eq!(complexity_eval(ComplexityScheme::HfSgpWithoutGamma, &p).unwrap(), sgp);
    }

    #[test]
    fn missing_parameters() {
        let p = ComplexityParams { b: None, ..full() };
        assert!(matches!(
            complexity_eval(ComplexityScheme::EpsOmpSsigw, &p),
            Err(Error::MissingParameter("B"))
        ));
        assert!(complexity_eval(ComplexityScheme::HfSgpWithGamma, &p).is_ok());
        assert!(complexity_eval(ComplexityScheme::HfSdOmp, &ComplexityParams::default()).is_err());
    }

    #[test]
    fn names_round_trip() {
        for s in ComplexityScheme::ALL {
            assert_eq!(s.name().parse::<ComplexityScheme>().unwrap(), s);
        }
        assert!("nope".parse::<ComplexityScheme>().is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_every_parameter(field in 0usize..12, bump in 0.0f64..50.0) {
            let base = full();
            let mut raised = base;
            let slot = match field {
                0 => &mut raised.n,
                1 => &mut raised.l,
                2 => &mut raised.l_f,
                3 => &mut raised.l_n,
                4 => &mut raised.q_f,
                5 => &mut raised.q_n,
                6 => &mut raised.q,
                7 => &mut raised.o,
                8 => &mut raised.n_gamma,
                9 => &mut raised.n_iter,
                10 => &mut raised.b,
                _ => &mut raised.i,
            };
            *slot = slot.map(|v| v + bump);
            for s in ComplexityScheme::ALL {
                prop_assert!(complexity_eval(s, &raised).unwrap() >= complexity_eval(s, &base).unwrap());
            }
        }
    }
}
