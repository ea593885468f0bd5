//! Closed-form Wick values: permanents for bosons, determinants for fermions.

use super::Statistics;
use crate::error::{Error, Result};
use crate::scalar::Coeff;

/// Largest matrix the closed forms accept.
pub const MAX_ORDER: usize = 12;

fn check_square<C>(m: &[Vec<C>]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Input("matrix must be square".into()));
    }
    if n > MAX_ORDER {
        return Err(Error::Input(format!("order {n} exceeds {MAX_ORDER}")));
    }
    Ok(n)
}

/// Ryser's formula `perm A = (−1)ⁿ Σ_S (−1)^{|S|} Π_i Σ_{j∈S} a_ij`.
pub fn permanent<C: Coeff>(m: &[Vec<C>]) -> Result<C> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(C::one());
    }
    let mut total = C::zero();
    for s in 1u32..(1 << n) {
        let mut prod = C::one();
        for row in m {
            let mut acc = C::zero();
            for (j, x) in row.iter().enumerate() {
                if s & (1 << j) != 0 {
                    acc = acc + x.clone();
                }
            }
            prod = prod * acc;
        }
        let odd = (n as u32 - s.count_ones()) % 2 == 1;
        total = if odd { total - prod } else { total + prod };
    }
    Ok(total)
}

/// Determinant by expansion over column subsets (division-free, so it works
/// over any coefficient ring).
pub fn determinant<C: Coeff>(m: &[Vec<C>]) -> Result<C> {
    let n = check_square(m)?;
    let mut table = vec![C::zero(); 1 << n];
    table[0] = C::one();
    for s in 1usize..(1 << n) {
        let row = s.count_ones() as usize - 1;
        let mut acc = C::zero();
        for j in 0..n {
            if s & (1 << j) == 0 {
                continue;
            }
            let rest = &table[s & !(1 << j)];
            if !rest.is_zero() {
                // sign of moving column j past the `higher` columns still in s
                let higher = (s >> (j + 1)).count_ones() as usize;
                let term = m[row][j].clone() * rest.clone();
                acc = if higher % 2 == 1 { acc - term } else { acc + term };
            }
        }
        table[s] = acc;
    }
    Ok(table[(1 << n) - 1].clone())
}

/// Vacuum value of `a_{f_n} … a_{f_1} a†_{g_1} … a†_{g_n}` with
/// `m[i][j] = [a_{f_i}, a†_{g_j}]_∓`, by contracting the innermost
/// annihilator against each creator in turn.
pub fn wick_contract<C: Coeff>(statistics: Statistics, m: &[Vec<C>]) -> Result<C> {
    let n = check_square(m)?;
    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..n).collect();
    Ok(contract_rec(statistics, m, &rows, &cols))
}

fn contract_rec<C: Coeff>(statistics: Statistics, m: &[Vec<C>], rows: &[usize], cols: &[usize]) -> C {
    if rows.is_empty() {
        return C::one();
    }
    let f = rows[0];
    let mut acc = C::zero();
    for (pos, &g) in cols.iter().enumerate() {
        let x = &m[f][g];
        if x.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&c| c != g).collect();
        let term = x.clone() * contract_rec(statistics, m, &rows[1..], &rest);
        acc = if statistics == Statistics::Fermi && pos % 2 == 1 { acc - term } else { acc + term };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactComplex;

    fn int_matrix(v: &[&[i64]]) -> Vec<Vec<ExactComplex>> {
        v.iter().map(|r| r.iter().map(|&x| ExactComplex::from_ratio(x, 1)).collect()).collect()
    }

    #[test]
    fn small_closed_forms() {
        let m = int_matrix(&[&[1, 2], &[3, 4]]);
        assert_eq!(permanent(&m).unwrap(), ExactComplex::from_ratio(10, 1));
        assert_eq!(determinant(&m).unwrap(), ExactComplex::from_ratio(-2, 1));
        let m3 = int_matrix(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]]);
        assert_eq!(determinant(&m3).unwrap(), ExactComplex::from_ratio(6, 1));
        assert!(permanent::<ExactComplex>(&vec![vec![ExactComplex::one(); 13]; 13]).is_err());
    }
}
