//! The resonance phase `Φ(n̄) = n₁⁴ - n₂⁴ + n₃⁴ - n⁴` on the convolution
//! hyperplane `n = n₁ - n₂ + n₃`, its product factorization, and enumeration
//! of the non-resonant tuple set `Γ(n)` (`n₁, n₃ ≠ n`).

use core::fmt;

/// Inputs beyond this magnitude are rejected; `n⁴` would leave the range
/// where the 128-bit evaluation is trusted without overflow analysis.
pub const MAX_MODE: i64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseError {
    OutOfRange { which: &'static str, value: i64 },
}

impl fmt::Display for PhaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseError::OutOfRange { which, value } => {
                write!(f, "phase input {} = {} exceeds |n| ≤ {}", which, value, MAX_MODE)
            }
        }
    }
}

impl core::error::Error for PhaseError {}

fn check(which: &'static str, v: i64) -> Result<i128, PhaseError> {
    if v.abs() > MAX_MODE {
        Err(PhaseError::OutOfRange { which, value: v })
    } else {
        Ok(v as i128)
    }
}

/// `Φ = n₁⁴ - n₂⁴ + n₃⁴ - n⁴` with `n = n₁ - n₂ + n₃`, exact in integers.
pub fn phi(n1: i64, n2: i64, n3: i64) -> Result<i128, PhaseError> {
    let a = check("n1", n1)?;
    let b = check("n2", n2)?;
    let c = check("n3", n3)?;
    let n = a - b + c;
    Ok(a.pow(4) - b.pow(4) + c.pow(4) - n.pow(4))
}

/// The product form `(n₁-n₂)(n₁-n)(n₁²+n₂²+n₃²+n²+2(n₁+n₃)²)`; agrees with
/// [`phi`] on every admissible input.
pub fn phi_factored(n1: i64, n2: i64, n3: i64) -> Result<i128, PhaseError> {
    let a = check("n1", n1)?;
    let b = check("n2", n2)?;
    let c = check("n3", n3)?;
    let n = a - b + c;
    let quad = a * a + b * b + c * c + n * n + 2 * (a + c) * (a + c);
    Ok((a - b) * (a - n) * quad)
}

/// One point of `Γ(n)` with its cached phase value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseTuple {
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
    pub n: i64,
    pub phi: i128,
}

impl PhaseTuple {
    pub fn new(n1: i64, n2: i64, n3: i64) -> Result<Self, PhaseError> {
        let phi = phi(n1, n2, n3)?;
        Ok(PhaseTuple { n1, n2, n3, n: n1 - n2 + n3, phi })
    }
}

/// All tuples `(n₁,n₂,n₃) ∈ Γ(n)` with every `|n_i| ≤ cutoff`.
///
/// `n₃ = n - n₁ + n₂` is determined, so the stream has `O(cutoff²)` entries.
pub fn gamma_tuples(n: i64, cutoff: i64) -> impl Iterator<Item = PhaseTuple> {
    assert!(cutoff >= 0 && cutoff <= MAX_MODE);
    (-cutoff..=cutoff)
        .filter(move |&n1| n1 != n)
        .flat_map(move |n1| {
            (-cutoff..=cutoff).filter_map(move |n2| {
                let n3 = n - n1 + n2;
                if n3.abs() > cutoff || n3 == n {
                    return None;
                }
                Some(PhaseTuple::new(n1, n2, n3).expect("cutoff within range"))
            })
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        // all modes equal: the sum telescopes
        assert_eq!(phi(1, 1, 1).unwrap(), 0);
        assert_eq!(phi_factored(1, 1, 1).unwrap(), 0);
        // 16 - 1 + 0 - 1
        assert_eq!(phi(2, 1, 0).unwrap(), 14);
        assert_eq!(phi_factored(2, 1, 0).unwrap(), 14);
        // 81 - 16 + 81 - 256
        assert_eq!(phi(3, 2, 3).unwrap(), -110);
        assert_eq!(phi_factored(3, 2, 3).unwrap(), -110);
    }

    #[test]
    fn factorization_exhaustive_small() {
        for n1 in -12..=12 {
            for n2 in -12..=12 {
                for n3 in -12..=12 {
                    assert_eq!(phi(n1, n2, n3).unwrap(), phi_factored(n1, n2, n3).unwrap());
                }
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(phi(MAX_MODE + 1, 0, 0).is_err());
        assert!(phi_factored(0, -MAX_MODE - 5, 0).is_err());
        assert!(phi(MAX_MODE, MAX_MODE, MAX_MODE).is_ok());
    }

    #[test]
    fn gamma_matches_triple_loop() {
        for (n, cutoff) in [(0i64, 0i64), (0, 1), (0, 8), (3, 8), (-5, 7)] {
            let fast: Vec<_> = gamma_tuples(n, cutoff).map(|t| (t.n1, t.n2, t.n3)).collect();
            let mut brute = Vec::new();
            for n1 in -cutoff..=cutoff {
                for n2 in -cutoff..=cutoff {
                    for n3 in -cutoff..=cutoff {
                        if n1 - n2 + n3 == n && n1 != n && n3 != n {
                            brute.push((n1, n2, n3));
                        }
                    }
                }
            }
            let mut fast_sorted = fast.clone();
            fast_sorted.sort();
            brute.sort();
            assert_eq!(fast_sorted, brute);
        }
    }

    #[test]
    fn gamma_small_cases() {
        // n=0, box=0: the only candidate (0,0,0) violates n1 ≠ n
        assert_eq!(gamma_tuples(0, 0).count(), 0);
        // n=0, box=1: exactly {(1,0,-1), (-1,0,1)}
        let mut got: Vec<_> = gamma_tuples(0, 1).map(|t| (t.n1, t.n2, t.n3)).collect();
        got.sort();
        assert_eq!(got, vec![(-1, 0, 1), (1, 0, -1)]);
        // every tuple lands on the hyperplane with a consistent cached phase
        for t in gamma_tuples(2, 6) {
            assert_eq!(t.n, t.n1 - t.n2 + t.n3);
            assert_eq!(t.phi, phi(t.n1, t.n2, t.n3).unwrap());
            assert_ne!(t.phi, 0, "Γ(n) tuples are never fully resonant");
        }
    }
}
