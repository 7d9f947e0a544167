//! Symbol alphabets and the `A Q(sqrt(2 B gamma))` SER approximation constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Bpsk,
    Bfsk,
    Gmsk,
    MDepsk,
    Qpsk,
    MPsk,
    MFsk,
    SquareQam,
    MDpsk,
    Dbpsk,
    MPam,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bpsk => "bpsk",
            Scheme::Bfsk => "bfsk",
            Scheme::Gmsk => "gmsk",
            Scheme::MDepsk => "m-depsk",
            Scheme::Qpsk => "qpsk",
            Scheme::MPsk => "m-psk",
            Scheme::MFsk => "m-fsk",
            Scheme::SquareQam => "square-qam",
            Scheme::MDpsk => "m-dpsk",
            Scheme::Dbpsk => "dbpsk",
            Scheme::MPam => "m-pam",
        }
    }
}

/// SER approximation `P_s ~ A Q(sqrt(2 B gamma))` for a scheme of a given order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModErrorParams {
    pub a: f64,
    pub b: f64,
    pub order: u32,
}

impl ModErrorParams {
    pub fn bits_per_symbol(&self) -> f64 {
        (self.order as f64).log2()
    }
}

fn is_square(order: u32) -> bool {
    let r = (order as f64).sqrt().round() as u32;
    r * r == order
}

/// Looks up the (A, B) constants. Binary schemes take order 2, QPSK order 4.
pub fn mod_params(scheme: Scheme, order: u32) -> Result<ModErrorParams> {
    let m = order as f64;
    let bad = || {
        config(format!(
            "order {order} is not listed for scheme {}",
            scheme.name()
        ))
    };
    let (a, b) = match scheme {
        Scheme::Bpsk | Scheme::Gmsk if order == 2 => (1.0, 1.0),
        Scheme::Bfsk if order == 2 => (1.0, 0.5),
        Scheme::Dbpsk if order == 2 => (2.0, 0.5),
        Scheme::Qpsk if order == 4 => (2.0, 0.5),
        Scheme::MPsk | Scheme::MDepsk if order >= 2 => (2.0, (PI / m).sin().powi(2)),
        Scheme::MDpsk if order >= 2 => (2.0, (PI / (2.0 * m)).sin().powi(2)),
        Scheme::MFsk if order > 2 => (m - 1.0, 0.5),
        Scheme::SquareQam if order >= 4 && is_square(order) => {
            (4.0 * (1.0 - 1.0 / m.sqrt()), 1.5 / (m - 1.0))
        }
        Scheme::MPam if order >= 2 => (2.0 * (m - 1.0) / m, 3.0 / (m * m - 1.0)),
        _ => return Err(bad()),
    };
    Ok(ModErrorParams { a, b, order })
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Unit-energy symbol alphabet. `points[label]` is the symbol carrying the bit
/// pattern `label`, so bit errors between labels are `(tx ^ rx).count_ones()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationSpec", into = "ConstellationSpec")]
pub struct Constellation {
    scheme: Scheme,
    order: u32,
    points: Vec<Complex64>,
    bits_per_symbol: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSpec {
    pub scheme: Scheme,
    pub order: u32,
}

impl TryFrom<ConstellationSpec> for Constellation {
    type Error = crate::Error;
    fn try_from(spec: ConstellationSpec) -> Result<Self> {
        Constellation::new(spec.scheme, spec.order)
    }
}

impl From<Constellation> for ConstellationSpec {
    fn from(c: Constellation) -> Self {
        ConstellationSpec {
            scheme: c.scheme,
            order: c.order,
        }
    }
}

impl Constellation {
    /// Builds a simulatable alphabet. Only coherent memoryless schemes are
    /// supported: BPSK, QPSK, M-PSK, square M-QAM and M-PAM with power-of-two order.
    pub fn new(scheme: Scheme, order: u32) -> Result<Self> {
        mod_params(scheme, order)?;
        if !order.is_power_of_two() {
            return Err(config(format!(
                "simulation needs a power-of-two order, got {order}"
            )));
        }
        let q = order as usize;
        let mut points = vec![Complex64::new(0.0, 0.0); q];
        match scheme {
            Scheme::Bpsk | Scheme::Qpsk | Scheme::MPsk => {
                let offset = if q == 4 { PI / 4.0 } else { 0.0 };
                for i in 0..q {
                    let phase = 2.0 * PI * i as f64 / q as f64 + offset;
                    points[gray(i)] = Complex64::from_polar(1.0, phase);
                }
            }
            Scheme::MPam => {
                let norm = (((q * q - 1) as f64) / 3.0).sqrt();
                for i in 0..q {
                    let amp = (2 * i) as f64 - (q - 1) as f64;
                    points[gray(i)] = Complex64::new(amp / norm, 0.0);
                }
            }
            Scheme::SquareQam => {
                let side = (q as f64).sqrt().round() as usize;
                let half_bits = side.trailing_zeros();
                let norm = (2.0 * (q - 1) as f64 / 3.0).sqrt();
                for i in 0..side {
                    for j in 0..side {
                        let label = (gray(i) << half_bits) | gray(j);
                        let re = (2 * i) as f64 - (side - 1) as f64;
                        let im = (2 * j) as f64 - (side - 1) as f64;
                        points[label] = Complex64::new(re / norm, im / norm);
                    }
                }
            }
            _ => {
                return Err(config(format!(
                    "scheme {} has SER constants but no simulatable alphabet",
                    scheme.name()
                )))
            }
        }
        Ok(Self {
            scheme,
            order,
            points,
            bits_per_symbol: order.trailing_zeros(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn error_params(&self) -> ModErrorParams {
        mod_params(self.scheme, self.order).expect("validated at construction")
    }

    pub fn bit_errors(tx: usize, rx: usize) -> u32 {
        (tx ^ rx).count_ones()
    }
}
