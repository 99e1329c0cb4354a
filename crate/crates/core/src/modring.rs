//! Exact arithmetic in the residue ring Z_L and the length rules for
//! Zauner-generated frames.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of Z_L, stored as its least non-negative representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Reduces any integer into `[0, modulus)`. Panics on a zero modulus.
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let m = modulus as i128;
        let v = (value as i128).rem_euclid(m) as u64;
        Residue { value: v, modulus }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    fn with_value(self, other: Residue, v: u128) -> Residue {
        debug_assert_eq!(self.modulus, other.modulus);
        Residue {
            value: (v % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
}

impl Add for Residue {
    type Output = Residue;

    fn add(self, other: Residue) -> Residue {
        self.with_value(other, self.value as u128 + other.value as u128)
    }
}

impl Sub for Residue {
    type Output = Residue;

    fn sub(self, other: Residue) -> Residue {
        let m = self.modulus as u128;
        self.with_value(other, self.value as u128 + m - other.value as u128)
    }
}

impl Mul for Residue {
    type Output = Residue;

    fn mul(self, other: Residue) -> Residue {
        self.with_value(other, self.value as u128 * other.value as u128)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// Multiplicative inverse via the extended Euclidean algorithm.
pub fn mod_inverse(x: Residue) -> Result<Residue> {
    let m = x.modulus as i128;
    let (mut r0, mut r1) = (m, x.value as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        // covers gcd > 1, and also modulus 1 where everything is 0
        if x.modulus == 1 {
            return Ok(Residue {
                value: 0,
                modulus: 1,
            });
        }
        return Err(Error::NotInvertible {
            value: x.value,
            modulus: x.modulus,
        });
    }
    Ok(Residue {
        value: t0.rem_euclid(m) as u64,
        modulus: x.modulus,
    })
}

/// Prime-power decomposition with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub prime_powers: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> u64 {
        self.prime_powers.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn is_square_free(&self) -> bool {
        self.prime_powers.iter().all(|&(_, e)| e == 1)
    }

    pub fn contains(&self, prime: u64) -> bool {
        self.prime_powers.iter().any(|&(p, _)| p == prime)
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.prime_powers {
            let current = divs.clone();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                divs.extend(current.iter().map(|d| d * pk));
            }
        }
        divs.sort_unstable();
        divs
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .prime_powers
            .iter()
            .map(|&(p, e)| {
                if e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        f.write_str(&parts.join(" · "))
    }
}

/// Trial division. Intended for the lengths used here (well under 10^9).
pub fn factorize(n: u64) -> Result<Factorization> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!(
            "cannot factorize {n}: need n >= 2"
        )));
    }
    let mut rest = n;
    let mut prime_powers = Vec::new();
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            prime_powers.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        prime_powers.push((rest, 1));
    }
    Ok(Factorization { prime_powers })
}

/// Which length rule to enforce for Zauner-generated spark-deficient frames.
///
/// `Strict` is the full hypothesis: odd, divisible by 3, square-free.
/// `Paper` drops square-freeness, which is how the published parameter table
/// (L = 45, 20349, 24633, ...) was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdmissibilityMode {
    Strict,
    #[default]
    Paper,
}

impl fmt::Display for AdmissibilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdmissibilityMode::Strict => "strict",
            AdmissibilityMode::Paper => "paper",
        })
    }
}

impl std::str::FromStr for AdmissibilityMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(AdmissibilityMode::Strict),
            "paper" => Ok(AdmissibilityMode::Paper),
            other => Err(format!("unknown admissibility mode `{other}`")),
        }
    }
}

/// Returns whether `n` is admissible under `mode`, together with its factorization.
pub fn is_admissible_length(n: u64, mode: AdmissibilityMode) -> Result<(bool, Factorization)> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!(
            "admissibility is defined for n >= 3, got {n}"
        )));
    }
    let fact = factorize(n)?;
    let base = n % 2 == 1 && n.is_multiple_of(3);
    let ok = match mode {
        AdmissibilityMode::Paper => base,
        AdmissibilityMode::Strict => base && fact.is_square_free(),
    };
    Ok((ok, fact))
}

/// Largest admissible length not exceeding `n`.
pub fn largest_admissible_at_most(n: u64, mode: AdmissibilityMode) -> Result<u64> {
    if n < 3 {
        return Err(Error::NoAdmissibleLength(n));
    }
    // odd multiples of 3 are 3 mod 6; start at the largest one <= n
    let mut candidate = n - (n + 3) % 6;
    loop {
        if is_admissible_length(candidate, mode)?.0 {
            return Ok(candidate);
        }
        if candidate < 9 {
            return Err(Error::NoAdmissibleLength(n));
        }
        candidate -= 6;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(Residue::new(32, 33)).unwrap().value(), 32);
        assert_eq!(mod_inverse(Residue::new(5, 33)).unwrap().value(), 20);
        assert!(matches!(
            mod_inverse(Residue::new(3, 33)),
            Err(Error::NotInvertible {
                value: 3,
                modulus: 33
            })
        ));
        assert_eq!(Residue::new(-1, 33).value(), 32);
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(33).unwrap().prime_powers, vec![(3, 1), (11, 1)]);
        assert_eq!(factorize(45).unwrap().prime_powers, vec![(3, 2), (5, 1)]);
        assert_eq!(
            factorize(20349).unwrap().prime_powers,
            vec![(3, 2), (7, 1), (17, 1), (19, 1)]
        );
        assert_eq!(factorize(2).unwrap().prime_powers, vec![(2, 1)]);
        assert!(factorize(1).is_err());
        assert_eq!(factorize(33).unwrap().to_string(), "3 · 11");
    }

    #[test]
    fn admissibility_examples() {
        use AdmissibilityMode::*;
        assert!(is_admissible_length(33, Strict).unwrap().0);
        assert!(!is_admissible_length(45, Strict).unwrap().0);
        assert!(is_admissible_length(45, Paper).unwrap().0);
        assert!(!is_admissible_length(6, Strict).unwrap().0);
        assert!(!is_admissible_length(6, Paper).unwrap().0);
        assert_eq!(largest_admissible_at_most(34, Strict).unwrap(), 33);
        assert_eq!(largest_admissible_at_most(33, Strict).unwrap(), 33);
        assert_eq!(largest_admissible_at_most(22938, Paper).unwrap(), 22935);
        assert_eq!(largest_admissible_at_most(3, Paper).unwrap(), 3);
        assert!(matches!(
            largest_admissible_at_most(2, Paper),
            Err(Error::NoAdmissibleLength(2))
        ));
    }

    #[test]
    fn published_lengths_are_paper_admissible_but_not_square_free() {
        for n in [45u64, 20349, 24633, 27531, 41769] {
            assert!(is_admissible_length(n, AdmissibilityMode::Paper).unwrap().0);
            assert!(
                !is_admissible_length(n, AdmissibilityMode::Strict)
                    .unwrap()
                    .0,
                "{n}"
            );
        }
        assert!(
            is_admissible_length(23205, AdmissibilityMode::Strict)
                .unwrap()
                .0
        );
    }

    #[test]
    fn divisors_of_33() {
        assert_eq!(factorize(33).unwrap().divisors(), vec![1, 3, 11, 33]);
    }

    proptest! {
        #[test]
        fn inverse_is_involution(m in 2u64..5000, v in 0u64..5000) {
            let x = Residue::new(v as i64, m);
            if let Ok(inv) = mod_inverse(x) {
                prop_assert_eq!((x * inv).value(), 1);
                prop_assert_eq!(mod_inverse(inv).unwrap(), x);
            }
        }

        #[test]
        fn factorization_reassembles(n in 2u64..2_000_000) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.product(), n);
            prop_assert!(f.prime_powers.windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn strict_implies_paper(n in 3u64..200_000) {
            if is_admissible_length(n, AdmissibilityMode::Strict).unwrap().0 {
                prop_assert!(is_admissible_length(n, AdmissibilityMode::Paper).unwrap().0);
            }
        }

        #[test]
        fn largest_admissible_is_maximal(n in 3u64..20_000) {
            let best = largest_admissible_at_most(n, AdmissibilityMode::Strict).unwrap();
            prop_assert!(best <= n);
            for k in best + 1..=n {
                prop_assert!(!is_admissible_length(k, AdmissibilityMode::Strict).unwrap().0);
            }
        }
    }
}
