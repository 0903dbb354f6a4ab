use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::ConstructionError;

/// Coprime `b′, b″` with positive `c′, c″` such that `c′b′ − c″b″ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutPair {
    pub b_prime: u64,
    pub b_second: u64,
    pub c_prime: u64,
    pub c_second: u64,
}

impl BezoutPair {
    /// `c′ + c″`, the number of single steps per composite step.
    pub fn period(&self) -> u64 {
        self.c_prime + self.c_second
    }

    /// The single-step sizes making up one composite step.
    pub fn composite_steps(&self) -> Vec<u64> {
        let mut out = vec![self.b_prime; self.c_prime as usize];
        out.extend(std::iter::repeat_n(self.b_second, self.c_second as usize));
        out
    }

    pub fn identity_holds(&self) -> bool {
        self.c_prime as u128 * self.b_prime as u128
            == self.c_second as u128 * self.b_second as u128 + 1
    }
}

/// The solution of `c′b′ − c″b″ = 1` with the smallest `c′` for which both
/// coefficients are positive.
///
/// This is the inverse of `b′` modulo `b″` taken in `1..=b″`, bumped by `b″`
/// when that would leave `c″ = 0` (only when `b′ = 1`, giving `c′ = b″ + 1`).
pub fn positive_bezout(b_prime: u64, b_second: u64) -> Result<BezoutPair, ConstructionError> {
    if b_prime == 0 || b_second == 0 {
        return Err(ConstructionError::InvalidParameter(
            "Bezout pair entries must be >= 1".into(),
        ));
    }
    let g = b_prime.gcd(&b_second);
    if g != 1 {
        return Err(ConstructionError::NotCoprime {
            b_prime,
            b_second,
            gcd: g,
        });
    }
    let ext = (b_prime as i128).extended_gcd(&(b_second as i128));
    let m = b_second as i128;
    let mut c_prime = ext.x.rem_euclid(m);
    if c_prime == 0 {
        c_prime = m;
    }
    if c_prime * b_prime as i128 - 1 < m {
        c_prime += m;
    }
    let c_second = (c_prime * b_prime as i128 - 1) / m;
    let to_u64 = |v: i128| {
        u64::try_from(v).map_err(|_| {
            ConstructionError::InvalidParameter(format!(
                "Bezout coefficients of ({b_prime}, {b_second}) exceed 64 bits"
            ))
        })
    };
    Ok(BezoutPair {
        b_prime,
        b_second,
        c_prime: to_u64(c_prime)?,
        c_second: to_u64(c_second)?,
    })
}

/// A finite prefix of a candidate good set, with usage marks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetPrefix {
    elements: Vec<u64>,
    used: Vec<bool>,
}

impl GoodSetPrefix {
    pub fn new(elements: Vec<u64>) -> Result<Self, ConstructionError> {
        if let Some(i) = elements.iter().position(|&b| b == 0) {
            return Err(ConstructionError::InvalidParameter(format!(
                "element {} of the set is 0",
                i + 1
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(&dup) = elements.iter().find(|&&b| !seen.insert(b)) {
            return Err(ConstructionError::InvalidParameter(format!(
                "element {dup} appears twice"
            )));
        }
        let used = vec![false; elements.len()];
        Ok(GoodSetPrefix { elements, used })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn is_used(&self, index: usize) -> bool {
        self.used[index]
    }

    pub fn mark_used(&mut self, value: u64) {
        if let Some(i) = self.elements.iter().position(|&b| b == value) {
            self.used[i] = true;
        }
    }

    /// Takes the first unused element and the first unused element coprime
    /// to it, marking both used.
    pub fn pick_pair(&mut self) -> Result<(u64, u64), ConstructionError> {
        let first = self
            .used
            .iter()
            .position(|u| !u)
            .ok_or(ConstructionError::Exhausted { element: None })?;
        let b_prime = self.elements[first];
        let second = (0..self.elements.len())
            .find(|&j| j != first && !self.used[j] && self.elements[j].gcd(&b_prime) == 1)
            .ok_or(ConstructionError::Exhausted {
                element: Some(b_prime),
            })?;
        self.used[first] = true;
        self.used[second] = true;
        Ok((b_prime, self.elements[second]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartnerCount {
    pub value: u64,
    pub partners: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodSetReport {
    pub horizon: usize,
    pub entries: Vec<PartnerCount>,
}

impl GoodSetReport {
    pub fn flagged(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().filter(|e| e.flagged).map(|e| e.value)
    }
}

/// For each of the first `horizon` elements, how many other elements among
/// the first `horizon` are coprime to it.
pub fn check_good_set(elements: &[u64], horizon: usize) -> GoodSetReport {
    let window = &elements[..horizon.min(elements.len())];
    let entries = window
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let partners = window
                .iter()
                .enumerate()
                .filter(|&(j, &c)| j != i && b.gcd(&c) == 1)
                .count();
            PartnerCount {
                value: b,
                partners,
                flagged: partners == 0,
            }
        })
        .collect();
    GoodSetReport {
        horizon: window.len(),
        entries,
    }
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut n = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= n).all(|&p| !n.is_multiple_of(p)) {
            out.push(n);
        }
        n += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bezout_examples() {
        let p = positive_bezout(3, 5).unwrap();
        assert_eq!((p.c_prime, p.c_second), (2, 1));
        let p = positive_bezout(2, 3).unwrap();
        assert_eq!((p.c_prime, p.c_second), (2, 1));
        let p = positive_bezout(5, 7).unwrap();
        assert_eq!((p.c_prime, p.c_second), (3, 2));
        let err = positive_bezout(4, 6).unwrap_err();
        assert!(matches!(err, ConstructionError::NotCoprime { gcd: 2, .. }));
    }

    #[test]
    fn degenerate_moduli() {
        let p = positive_bezout(1, 1).unwrap();
        assert_eq!((p.c_prime, p.c_second), (2, 1));
        let p = positive_bezout(7, 1).unwrap();
        assert_eq!((p.c_prime, p.c_second), (1, 6));
        let p = positive_bezout(1, 5).unwrap();
        assert_eq!((p.c_prime, p.c_second), (6, 1));
        assert!(positive_bezout(0, 3).is_err());
    }

    proptest! {
        #[test]
        fn bezout_is_exact_and_minimal(a in 1u64..400, b in 1u64..400) {
            prop_assume!(a.gcd(&b) == 1);
            let p = positive_bezout(a, b).unwrap();
            prop_assert!(p.identity_holds());
            prop_assert!(p.c_prime >= 1 && p.c_second >= 1);
            for c in 1..p.c_prime {
                let v = c * a;
                prop_assert!(!(v > b && (v - 1) % b == 0));
            }
        }
    }

    #[test]
    fn pair_selection() {
        let mut b = GoodSetPrefix::new(vec![2, 3, 4, 5]).unwrap();
        assert_eq!(b.pick_pair().unwrap(), (2, 3));
        assert_eq!(b.pick_pair().unwrap(), (4, 5));
        assert!(matches!(
            b.pick_pair(),
            Err(ConstructionError::Exhausted { element: None })
        ));
        let mut even = GoodSetPrefix::new(vec![2, 4, 8]).unwrap();
        assert!(matches!(
            even.pick_pair(),
            Err(ConstructionError::Exhausted { element: Some(2) })
        ));
        assert!(!even.is_used(0));
        assert!(GoodSetPrefix::new(vec![3, 3]).is_err());
        assert!(GoodSetPrefix::new(vec![0, 1]).is_err());
    }

    #[test]
    fn good_set_reports() {
        let primes = first_primes(25);
        assert_eq!(*primes.last().unwrap(), 97);
        let r = check_good_set(&primes, 25);
        assert!(r.entries.iter().all(|e| e.partners == 24));
        assert_eq!(r.flagged().count(), 0);
        let r = check_good_set(&[2, 4, 6, 8], 4);
        assert_eq!(r.flagged().collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        let r = check_good_set(&[2, 3], 2);
        assert!(r.entries.iter().all(|e| e.partners == 1));
    }
}
