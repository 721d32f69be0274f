//! Seeded random instances: distributions drawn uniformly from the simplex
//! (flat Dirichlet) and channels with independent uniform rows.

use rand::Rng;
use rand_distr::Exp1;

use crate::simplex::{Channel, Pmf};

pub(crate) fn flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// A distribution on `n ≥ 1` symbols, uniform over the simplex.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Pmf {
    assert!(n > 0, "random_pmf needs at least one symbol");
    Pmf::from_vec(flat_dirichlet(rng, n))
}

/// A channel whose rows are independent uniform draws from the simplex.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize) -> Channel {
    assert!(nx > 0 && ny > 0, "random_channel needs nonempty alphabets");
    let rows = (0..nx).map(|_| flat_dirichlet(rng, ny)).collect();
    Channel::new(rows).expect("rows are normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let (p, q) = (random_pmf(&mut a, 4), random_pmf(&mut b, 4));
        assert_eq!(p, q);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w = random_channel(&mut a, 3, 2);
        assert_eq!((w.nx(), w.ny()), (3, 2));
    }
}
