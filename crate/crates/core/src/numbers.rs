//! Small integer helpers: gcd/lcm, Chinese remaindering and prime ladders.

use num_integer::Integer;

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Least common multiple of all values, `None` on overflow. The empty product is 1.
pub fn lcm_all(values: &[u64]) -> Option<u64> {
    values.iter().try_fold(1u64, |acc, &v| {
        let g = acc.gcd(&v);
        (acc / g).checked_mul(v)
    })
}

/// Solves `t ≡ r1 (mod m1)`, `t ≡ r2 (mod m2)` for coprime moduli and returns
/// the unique solution in `[0, m1·m2)`.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> Option<u64> {
    let e = (m1 as i128).extended_gcd(&(m2 as i128));
    if e.gcd != 1 {
        return None;
    }
    let (m1, m2) = (m1 as i128, m2 as i128);
    let modulus = m1 * m2;
    // e.x * m1 ≡ 1 (mod m2)
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2);
    let k = (diff * e.x.rem_euclid(m2)).rem_euclid(m2);
    Some(((r1 as i128 + k * m1).rem_euclid(modulus)) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// `count` consecutive primes starting at the smallest prime `>= start`.
pub fn consecutive_primes(start: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = next_prime(start);
    while out.len() < count {
        out.push(p);
        p = next_prime(p + 1);
    }
    out
}
