//! Smallest-prime-factor sieve and divisor enumeration.

/// `spf[n]` is the smallest prime factor of `n` for `2 <= n <= limit`.
#[derive(Debug, Clone)]
pub struct SmallestPrimeFactors {
    spf: Vec<u32>,
}

impl SmallestPrimeFactors {
    /// Linear sieve, O(limit).
    pub fn new(limit: usize) -> Self {
        assert!(limit < u32::MAX as usize, "sieve limit must fit in u32");
        let mut spf = vec![0u32; limit + 1];
        let mut primes: Vec<u32> = Vec::new();
        for n in 2..=limit {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u32);
            }
            let s = spf[n];
            for &p in &primes {
                let m = n * p as usize;
                if p > s || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn smallest_factor(&self, n: usize) -> u32 {
        self.spf[n]
    }

    /// Prime factorization of `n` as `(prime, exponent)` pairs.
    pub fn factorize(&self, mut n: usize, out: &mut Vec<(usize, u32)>) {
        out.clear();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }

    /// All divisors of `n` (unordered), written into `out`.
    pub fn divisors(&self, n: usize, factors: &mut Vec<(usize, u32)>, out: &mut Vec<usize>) {
        self.factorize(n, factors);
        out.clear();
        out.push(1);
        for &(p, e) in factors.iter() {
            let len = out.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spf_and_divisors() {
        let s = SmallestPrimeFactors::new(100);
        assert_eq!(s.smallest_factor(97), 97);
        assert_eq!(s.smallest_factor(91), 7);
        let (mut f, mut d) = (Vec::new(), Vec::new());
        s.divisors(60, &mut f, &mut d);
        d.sort_unstable();
        assert_eq!(d, vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]);
        s.divisors(1, &mut f, &mut d);
        assert_eq!(d, vec![1]);
        for n in 1..=100 {
            s.divisors(n, &mut f, &mut d);
            let brute = (1..=n).filter(|k| n % k == 0).count();
            assert_eq!(d.len(), brute);
        }
    }
}
