//! Quantitative estimate of drug-likeness: a weighted geometric mean of
//! asymmetric double-sigmoid desirability functions.

use super::descriptors::DescriptorVector;

/// Parameters of one asymmetric double sigmoid.
#[derive(Clone, Copy, Debug)]
pub struct Desirability {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub dmax: f64,
}

impl Desirability {
    pub fn eval(&self, x: f64) -> f64 {
        let rise = 1.0 + (-(x - self.c + self.d / 2.0) / self.e).exp();
        let fall = 1.0 + (-(x - self.c - self.d / 2.0) / self.f).exp();
        (self.a + self.b / rise * (1.0 - 1.0 / fall)) / self.dmax
    }
}

const fn ads(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64, dmax: f64) -> Desirability {
    Desirability {
        a,
        b,
        c,
        d,
        e,
        f,
        dmax,
    }
}

/// MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS.
pub const PARAMETERS: [Desirability; 8] = [
    ads(2.817065973, 392.5754953, 290.7489764, 2.419764353, 49.22325677, 65.37051707, 104.9805561),
    ads(3.172690585, 137.8624751, 2.534937431, 4.581497897, 0.822739154, 0.576295591, 131.3186604),
    ads(2.948620388, 160.4605972, 3.615294657, 4.435986202, 0.290141953, 1.300669958, 148.7763046),
    ads(1.618662227, 1010.051101, 0.985094388, 0.000000001, 0.713820843, 0.920922555, 258.1632616),
    ads(1.876861559, 125.2232657, 62.90773554, 87.83366614, 12.01999824, 28.51324732, 104.5686167),
    ads(0.010000000, 272.4121427, 2.558379970, 1.565547684, 1.271567166, 2.758063707, 105.4420403),
    ads(3.217788970, 957.7374108, 2.274627939, 0.000000001, 1.317690384, 0.375760881, 312.3372610),
    ads(0.010000000, 1199.094025, -0.09002883, 0.000000001, 0.185904477, 0.875193782, 417.7253140),
];

/// Mean descriptor weights.
pub const WEIGHTS: [f64; 8] = [0.66, 0.46, 0.05, 0.61, 0.06, 0.65, 0.48, 0.95];

pub fn qed_from_descriptors(v: &DescriptorVector) -> f64 {
    let x = [
        v.molecular_weight,
        v.alogp,
        f64::from(v.hba),
        f64::from(v.hbd),
        v.tpsa,
        f64::from(v.rotatable_bonds),
        f64::from(v.aromatic_rings),
        f64::from(v.alerts),
    ];
    let mut log_sum = 0.0;
    for ((p, w), xi) in PARAMETERS.iter().zip(WEIGHTS).zip(x) {
        log_sum += w * p.eval(xi).ln();
    }
    (log_sum / WEIGHTS.iter().sum::<f64>()).exp().clamp(0.0, 1.0)
}
