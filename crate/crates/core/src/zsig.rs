//! Multiplicative orders and Zsigmondy (primitive) prime divisors.
//!
//! Everything here is trial division; inputs stay below ~10^12.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs, primes ascending.
pub fn factorize(mut n: u128) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d as u64, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n as u64, 1));
    }
    out
}

pub fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n as u128).into_iter().map(|(p, _)| p).collect()
}

/// `(p, a)` with `q = p^a`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q as u128).as_slice() {
        [(p, a)] => Some((*p, *a)),
        _ => None,
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128 % m as u128;
    let mut base = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    acc as u64
}

/// Least `k ≥ 1` with `q^k ≡ 1 (mod r)`.
pub fn mult_order(q: u64, r: u64) -> Result<u64> {
    if !is_prime(r) {
        return Err(Error::NotPrimeArgument(r));
    }
    if q % r == 0 {
        return Err(Error::NotCoprime { q, r });
    }
    // The order divides r - 1; take the smallest divisor that works.
    let n = r - 1;
    let mut divisors: Vec<u64> = (1..=n)
        .take_while(|d| d * d <= n)
        .filter(|d| n % d == 0)
        .flat_map(|d| [d, n / d])
        .collect();
    divisors.sort_unstable();
    divisors.dedup();
    Ok(divisors
        .into_iter()
        .find(|&d| pow_mod(q, d, r) == 1)
        .expect("q^(r-1) = 1 mod r"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZsigPrime {
    pub r: u64,
    /// Multiplicative order of `q` modulo `r`; equals `n`.
    pub order: u64,
    /// Largest power of `r` dividing `q^n - 1`.
    pub r_part: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZsigResult {
    pub q: u64,
    pub n: u32,
    pub primes: Vec<ZsigPrime>,
}

impl ZsigResult {
    pub fn primes(&self) -> Vec<u64> {
        self.primes.iter().map(|z| z.r).collect()
    }
}

/// All primes `r | q^n - 1` for which `q` has order exactly `n` mod `r`.
///
/// For `n = 1` the condition on smaller exponents is vacuous, so every
/// prime divisor of `q - 1` qualifies.
pub fn zsigmondy_primes(q: u64, n: u32) -> Result<ZsigResult> {
    match prime_power(q) {
        Some((p, _)) if p != 2 => {}
        _ => return Err(Error::InvalidPrimePower(q)),
    }
    if n == 0 {
        return Err(Error::ZeroParameter("n"));
    }
    let value = (q as u128)
        .checked_pow(n)
        .ok_or(Error::InvalidPrimePower(q))?
        - 1;
    let mut primes = Vec::new();
    for (r, e) in factorize(value) {
        let order = mult_order(q, r)?;
        if order == n as u64 {
            primes.push(ZsigPrime {
                r,
                order,
                r_part: (r as u128).pow(e),
            });
        }
    }
    Ok(ZsigResult { q, n, primes })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FermatReport {
    pub q: u64,
    pub b: u32,
    /// `q^{2^b} + 1`.
    pub value: u128,
    pub factors: Vec<(u64, u32)>,
    /// Odd prime factors, each checked to be Zsigmondy for `q^{2^{b+1}} - 1`.
    pub odd_primes: Vec<u64>,
    pub all_zsigmondy: bool,
    /// `2^{b+1} + 1`.
    pub fermat_candidate: u64,
    pub fermat_is_prime: bool,
    /// `q^{2^b} + 1 = 2 r^t` with `r = 2^{b+1} + 1` a Fermat prime.
    pub exceptional: bool,
}

/// Factors `q^{2^b} + 1` and tests the Fermat-prime exceptional
/// configuration.
pub fn fermat_exception_check(q: u64, b: u32) -> FermatReport {
    let value = (q as u128).pow(1 << b) + 1;
    let factors = factorize(value);
    let odd_primes: Vec<u64> = factors.iter().map(|f| f.0).filter(|&r| r != 2).collect();
    let n = 1u32 << (b + 1);
    let all_zsigmondy = odd_primes
        .iter()
        .all(|&r| mult_order(q, r).map(|o| o == n as u64).unwrap_or(false));
    let fermat_candidate = (1u64 << (b + 1)) + 1;
    let fermat_is_prime = is_prime(fermat_candidate);
    let two_part = factors.iter().find(|f| f.0 == 2).map_or(0, |f| f.1);
    let exceptional =
        fermat_is_prime && two_part == 1 && odd_primes.as_slice() == [fermat_candidate];
    FermatReport {
        q,
        b,
        value,
        factors,
        odd_primes,
        all_zsigmondy,
        fermat_candidate,
        fermat_is_prime,
        exceptional,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: a prime r is Zsigmondy for q^n - 1 iff it divides q^n - 1
    /// and none of q^j - 1 for j < n, checked by direct big-integer division.
    fn naive_zsig(q: u64, n: u32) -> Vec<u64> {
        let v = (q as u128).pow(n) - 1;
        (2..=v.min(1_000_000) as u64)
            .filter(|&r| v % r as u128 == 0 && is_prime(r))
            .filter(|&r| (1..n).all(|j| ((q as u128).pow(j) - 1) % r as u128 != 0))
            .collect()
    }

    #[test]
    fn orders() {
        assert_eq!(mult_order(7, 3).unwrap(), 1);
        assert_eq!(mult_order(5, 3).unwrap(), 2);
        assert_eq!(mult_order(3, 5).unwrap(), 4);
        assert_eq!(mult_order(6, 3), Err(Error::NotCoprime { q: 6, r: 3 }));
    }

    #[test]
    fn small_cases() {
        assert_eq!(zsigmondy_primes(5, 2).unwrap().primes(), vec![3]);
        assert!(zsigmondy_primes(3, 2).unwrap().primes.is_empty());
        assert_eq!(zsigmondy_primes(3, 4).unwrap().primes(), vec![5]);
        let z = zsigmondy_primes(3, 4).unwrap();
        assert_eq!(z.primes[0].r_part, 5);
        assert!(matches!(
            zsigmondy_primes(6, 2),
            Err(Error::InvalidPrimePower(6))
        ));
        assert!(matches!(
            zsigmondy_primes(8, 2),
            Err(Error::InvalidPrimePower(8))
        ));
        // n = 1: every prime divisor of q - 1.
        assert_eq!(zsigmondy_primes(13, 1).unwrap().primes(), vec![2, 3]);
    }

    #[test]
    fn agrees_with_naive_definition() {
        for q in [3u64, 5, 7, 9, 11, 13] {
            for n in 1..=5 {
                assert_eq!(
                    zsigmondy_primes(q, n).unwrap().primes(),
                    naive_zsig(q, n),
                    "q={q} n={n}"
                );
            }
        }
    }

    #[test]
    fn existence_and_congruences() {
        for q in [3u64, 5, 7, 9, 11, 13] {
            for n in 3..=8u32 {
                let z = zsigmondy_primes(q, n).unwrap();
                assert!(!z.primes.is_empty(), "q={q} n={n}");
                for r in z.primes() {
                    assert!(r > n as u64);
                    assert_eq!(r % n as u64, 1);
                    if n % 2 == 0 {
                        let half = n / 2;
                        assert_eq!(((q as u128).pow(half) + 1) % r as u128, 0);
                        assert_ne!(((q as u128).pow(half) - 1) % r as u128, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn fermat_configurations() {
        let r = fermat_exception_check(3, 1);
        assert_eq!(r.value, 10);
        assert_eq!(r.odd_primes, vec![5]);
        assert!(r.all_zsigmondy && r.exceptional);

        let r = fermat_exception_check(5, 1);
        assert_eq!(r.value, 26);
        assert_eq!(r.odd_primes, vec![13]);
        assert!(r.all_zsigmondy && !r.exceptional);

        let r = fermat_exception_check(3, 0);
        assert_eq!(r.value, 4);
        assert!(r.odd_primes.is_empty() && r.all_zsigmondy && !r.exceptional);
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(51840), vec![(2, 7), (3, 4), (5, 1)]);
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
    }
}
