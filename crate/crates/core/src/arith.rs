//! Small-integer number theory: gcd/lcm, primality, factorization and
//! pairwise congruence merging.

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u128, b: u128) -> Option<u128> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The `k`-th prime, zero-based (`nth_prime(0) = 2`).
pub fn nth_prime(k: usize) -> u64 {
    (2u64..)
        .filter(|&n| is_prime(n))
        .nth(k)
        .expect("infinitely many primes")
}

/// Least prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    (n + 1..)
        .find(|&q| is_prime(q))
        .expect("infinitely many primes")
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&q| is_prime(q)).collect()
}

/// Prime factorization as `(p, k)` pairs with `p^k ∥ n`, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Extended Euclid over signed integers: `(g, x, y)` with `a·x + b·y = g`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Intersects `r1 + m1·ℤ` with `r2 + m2·ℤ`.
///
/// Returns `Ok(Some((r, lcm)))` with `0 ≤ r < lcm`, `Ok(None)` when the
/// classes are disjoint, and `Err(())` on overflow.
#[allow(clippy::result_unit_err)]
pub fn merge_congruences(
    r1: u128,
    m1: u128,
    r2: u128,
    m2: u128,
) -> Result<Option<(u128, u128)>, ()> {
    let g = gcd(m1, m2);
    let diff = r2 as i128 - r1 as i128;
    if diff.rem_euclid(g as i128) != 0 {
        return Ok(None);
    }
    let l = lcm(m1, m2).ok_or(())?;
    if l > i128::MAX as u128 / 4 {
        return Err(());
    }
    let (_, x, _) = ext_gcd(m1 as i128, m2 as i128);
    let m2g = (m2 / g) as i128;
    let t = ((diff / g as i128) % m2g * (x % m2g)).rem_euclid(m2g);
    let r = (r1 as i128 + m1 as i128 * t).rem_euclid(l as i128);
    Ok(Some((r as u128, l)))
}
