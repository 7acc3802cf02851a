//! The four anticommuting matrices (α₁, α₂, α₃, β) behind both the Dirac
//! Hamiltonian and the intrinsic time operator.
//!
//! They satisfy {αᵢ, αⱼ} = 2δᵢⱼ I₄, {αᵢ, β} = 0 and β² = I₄. Every
//! representation here is related to the standard one by a unitary change of
//! basis, and all downstream constructors take the algebra explicitly so the
//! physics can be cross-checked across representations.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::report::VerificationReport;

pub type Mat4 = Matrix4<C64>;

pub const DIRAC_STANDARD: &str = "dirac-standard";
pub const WEYL: &str = "weyl";
pub const MAJORANA: &str = "majorana";
pub const SUPPORTED_REPRESENTATIONS: [&str; 3] = [DIRAC_STANDARD, WEYL, MAJORANA];

#[derive(Debug, Clone, PartialEq)]
pub struct DiracAlgebra {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
    pub representation: String,
}

const O: C64 = C64::new(0.0, 0.0);
const R1: C64 = C64::new(1.0, 0.0);
const I1: C64 = C64::new(0.0, 1.0);

type Mat2 = [[C64; 2]; 2];

const ZERO2: Mat2 = [[O, O], [O, O]];
const ID2: Mat2 = [[R1, O], [O, R1]];
const SX: Mat2 = [[O, R1], [R1, O]];
const SY: Mat2 = [[O, C64::new(0.0, -1.0)], [I1, O]];
const SZ: Mat2 = [[R1, O], [O, C64::new(-1.0, 0.0)]];

fn scale2(a: Mat2, s: C64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

fn blocks(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> Mat4 {
    Mat4::from_fn(|i, j| {
        let blk = match (i / 2, j / 2) {
            (0, 0) => &a,
            (0, 1) => &b,
            (1, 0) => &c,
            _ => &d,
        };
        blk[i % 2][j % 2]
    })
}

pub fn build_dirac_algebra(representation: &str) -> Result<DiracAlgebra> {
    let neg = C64::new(-1.0, 0.0);
    let (alpha, beta) = match representation {
        DIRAC_STANDARD => (
            [
                blocks(ZERO2, SX, SX, ZERO2),
                blocks(ZERO2, SY, SY, ZERO2),
                blocks(ZERO2, SZ, SZ, ZERO2),
            ],
            blocks(ID2, ZERO2, ZERO2, scale2(ID2, neg)),
        ),
        WEYL => (
            [
                blocks(scale2(SX, neg), ZERO2, ZERO2, SX),
                blocks(scale2(SY, neg), ZERO2, ZERO2, SY),
                blocks(scale2(SZ, neg), ZERO2, ZERO2, SZ),
            ],
            blocks(ZERO2, ID2, ID2, ZERO2),
        ),
        MAJORANA => (
            // Real α's, purely imaginary β.
            [
                blocks(SX, ZERO2, ZERO2, SX),
                blocks(ZERO2, scale2(SY, -I1), scale2(SY, I1), ZERO2),
                blocks(SZ, ZERO2, ZERO2, SZ),
            ],
            blocks(ZERO2, SY, SY, ZERO2),
        ),
        other => {
            return Err(Error::UnknownRepresentation {
                label: other.to_string(),
                supported: SUPPORTED_REPRESENTATIONS.to_vec(),
            })
        }
    };
    Ok(DiracAlgebra {
        alpha,
        beta,
        representation: representation.to_string(),
    })
}

impl DiracAlgebra {
    pub fn standard() -> Self {
        build_dirac_algebra(DIRAC_STANDARD).expect("standard representation")
    }

    /// Applies the change of basis M ↦ S M S†.
    pub fn transformed(&self, s: &Mat4, label: &str) -> Self {
        let sd = s.adjoint();
        let t = |m: &Mat4| s * m * sd;
        Self {
            alpha: [t(&self.alpha[0]), t(&self.alpha[1]), t(&self.alpha[2])],
            beta: t(&self.beta),
            representation: label.to_string(),
        }
    }

    /// Spin matrix Σₖ = −(i/2) εₖᵢⱼ αᵢαⱼ; the spin operator is ħΣ/2.
    pub fn sigma(&self, k: usize) -> Mat4 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        (self.alpha[i] * self.alpha[j]) * C64::new(0.0, -1.0)
    }

    /// The four matrices in the order α₁, α₂, α₃, β.
    pub fn matrices(&self) -> [(&'static str, &Mat4); 4] {
        [
            ("a1", &self.alpha[0]),
            ("a2", &self.alpha[1]),
            ("a3", &self.alpha[2]),
            ("b", &self.beta),
        ]
    }
}

pub fn anticommutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b + b * a
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks the ten anticommutation identities, Hermiticity and tracelessness.
pub fn verify_clifford(algebra: &DiracAlgebra, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::new("clifford", "clifford-algebra");
    report.measure("tolerance", tol);
    let mats = algebra.matrices();
    let id = Mat4::identity();
    let zero = Mat4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let (ni, a) = mats[i];
            let (nj, b) = mats[j];
            let expected = if i == j { id * C64::new(2.0, 0.0) } else { zero };
            let res = max_abs_diff(&anticommutator(a, b), &expected);
            report.push(format!("{{{ni},{nj}}}"), res, tol);
        }
    }
    for (name, m) in mats {
        report.push(format!("hermitian {name}"), max_abs_diff(m, &m.adjoint()), tol);
    }
    for (name, m) in mats {
        report.push(format!("traceless {name}"), m.trace().norm(), tol);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unitary(seed: u64) -> Mat4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Mat4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        m.qr().q()
    }

    #[test]
    fn beta_squared_is_identity() {
        let a = DiracAlgebra::standard();
        assert_eq!(a.beta * a.beta, Mat4::identity());
    }

    #[test]
    fn alpha_pairs() {
        let a = DiracAlgebra::standard();
        assert_eq!(anticommutator(&a.alpha[0], &a.alpha[1]), Mat4::zeros());
        assert_eq!(
            anticommutator(&a.alpha[2], &a.alpha[2]),
            Mat4::identity() * C64::new(2.0, 0.0)
        );
    }

    #[test]
    fn standard_beta_is_diag() {
        let a = DiracAlgebra::standard();
        let d: Vec<f64> = (0..4).map(|i| a.beta[(i, i)].re).collect();
        assert_eq!(d, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn all_representations_verify_exactly() {
        for rep in SUPPORTED_REPRESENTATIONS {
            let a = build_dirac_algebra(rep).unwrap();
            let r = verify_clifford(&a, 0.0);
            assert!(r.passed(), "{rep}: {:?}", r.failures().collect::<Vec<_>>());
            assert_eq!(r.checks.len(), 10 + 4 + 4);
        }
    }

    #[test]
    fn majorana_alphas_are_real() {
        let a = build_dirac_algebra(MAJORANA).unwrap();
        for m in &a.alpha {
            assert!(m.iter().all(|z| z.im == 0.0));
        }
        assert!(a.beta.iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn perturbed_alpha_is_pinpointed() {
        let mut a = DiracAlgebra::standard();
        a.alpha[0][(0, 3)] += C64::new(1e-6, 0.0);
        a.alpha[0][(3, 0)] += C64::new(1e-6, 0.0);
        let r = verify_clifford(&a, 1e-12);
        assert!(!r.passed());
        assert!(!r.get("{a1,a1}").unwrap().passed);
        assert!(r.get("{a2,a2}").unwrap().passed);
        assert!(r.get("{b,b}").unwrap().passed);
    }

    #[test]
    fn unknown_label_names_supported() {
        let err = build_dirac_algebra("pauli").unwrap_err().to_string();
        for rep in SUPPORTED_REPRESENTATIONS {
            assert!(err.contains(rep), "{err}");
        }
    }

    #[test]
    fn spin_matrices_follow_the_algebra() {
        let a = DiracAlgebra::standard();
        let s3 = a.sigma(2);
        let expected = Mat4::from_diagonal(&nalgebra::Vector4::new(R1, -R1, R1, -R1));
        assert!(max_abs_diff(&s3, &expected) < 1e-15);
        // Σ₃ commutes with α₃ and β in every representation.
        for rep in SUPPORTED_REPRESENTATIONS {
            let a = build_dirac_algebra(rep).unwrap();
            let s = a.sigma(2);
            assert!(max_abs_diff(&(s * a.alpha[2]), &(a.alpha[2] * s)) < 1e-15);
            assert!(max_abs_diff(&(s * a.beta), &(a.beta * s)) < 1e-15);
        }
    }

    #[test]
    fn unitary_change_of_basis_preserves_verification() {
        let base = DiracAlgebra::standard();
        for seed in 0..8 {
            let s = random_unitary(seed);
            let t = base.transformed(&s, "rotated");
            let r = verify_clifford(&t, 1e-12);
            assert!(r.passed(), "seed {seed}: max residual {}", r.max_residual());
        }
    }
}
