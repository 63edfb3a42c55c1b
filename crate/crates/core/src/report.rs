//! Per-pair and sum spectral efficiencies, shared by every evaluator.

/// Spectral efficiencies of one user pair, in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairSe {
    /// UL sum rate of the pair, `R_1,i`.
    pub r1: f64,
    /// `U_A,i → relay`.
    pub r_ar: f64,
    /// `U_B,i → relay`.
    pub r_br: f64,
    /// `relay → U_A,i`.
    pub r_ra: f64,
    /// `relay → U_B,i`.
    pub r_rb: f64,
    /// DL-phase rate, `min(R_AR, R_RB) + min(R_BR, R_RA)`.
    pub r2: f64,
    /// `min(R_1, R_2)`.
    pub r: f64,
}

impl PairSe {
    /// Builds the pair from its five link-level rates; a decoded stream can
    /// only be forwarded as fast as it was received.
    pub fn assemble(r1: f64, r_ar: f64, r_br: f64, r_ra: f64, r_rb: f64) -> Self {
        let r2 = r_ar.min(r_rb) + r_br.min(r_ra);
        PairSe {
            r1,
            r_ar,
            r_br,
            r_ra,
            r_rb,
            r2,
            r: r1.min(r2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeReport {
    pub pairs: Vec<PairSe>,
}

impl SeReport {
    pub fn new(pairs: Vec<PairSe>) -> Self {
        SeReport { pairs }
    }

    /// Sum SE `Σ R_i`.
    pub fn sum(&self) -> f64 {
        self.pairs.iter().map(|p| p.r).sum()
    }

    pub fn sum_r1(&self) -> f64 {
        self.pairs.iter().map(|p| p.r1).sum()
    }

    pub fn sum_r2(&self) -> f64 {
        self.pairs.iter().map(|p| p.r2).sum()
    }

    /// True when every min/sum identity holds exactly.
    pub fn is_consistent(&self) -> bool {
        self.pairs.iter().all(|p| {
            p.r2 == p.r_ar.min(p.r_rb) + p.r_br.min(p.r_ra) && p.r == p.r1.min(p.r2)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_crosses_directions() {
        let p = PairSe::assemble(5.0, 1.0, 4.0, 2.0, 3.0);
        assert_eq!(p.r2, 1.0 + 2.0);
        assert_eq!(p.r, 3.0);
        let report = SeReport::new(vec![p, PairSe::assemble(1.0, 9.0, 9.0, 9.0, 9.0)]);
        assert_eq!(report.sum(), 4.0);
        assert!(report.is_consistent());
    }

    #[test]
    fn unbounded_links_propagate() {
        let p = PairSe::assemble(2.0, f64::INFINITY, f64::INFINITY, 1.0, 1.5);
        assert_eq!(p.r2, 2.5);
        assert_eq!(p.r, 2.0);
    }
}
