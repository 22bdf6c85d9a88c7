//! Sparse LU factorization of the simplex basis (Markowitz pivoting with a
//! threshold test) plus product-form eta updates between refactorizations.

const DROP: f64 = 1e-14;
const SINGULAR: f64 = 1e-11;
const THRESHOLD: f64 = 0.1;
const SEARCH_COLUMNS: usize = 4;

#[derive(Debug)]
pub(crate) struct Singular {
    /// Basis positions that could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct URow {
    row: usize,
    col: usize,
    diag: f64,
    rest: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    rest: Vec<(usize, f64)>,
}

/// `B = L U` with row/column permutations implied by the pivot sequence.
#[derive(Debug, Clone, Default)]
pub(crate) struct Factor {
    m: usize,
    lower: Vec<(usize, Vec<(usize, f64)>)>,
    upper: Vec<URow>,
    etas: Vec<Eta>,
}

impl Factor {
    /// Factorizes the `m × m` matrix whose column `pos` is `columns[pos]`
    /// (sparse `(row, value)` lists).
    pub fn new(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(columns.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v.abs() > DROP {
                    rows[r].push((c, v));
                    col_rows[c].push(r);
                    col_count[c] += 1;
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut work = vec![0.0f64; m];
        let mut mark = vec![false; m];
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);

        for _ in 0..m {
            let pivot = Self::choose_pivot(&rows, &col_rows, &col_count, &row_active, &col_active);
            let Some((p, q, apq)) = pivot else {
                let positions = (0..m).filter(|&c| col_active[c]).collect();
                let rows_left = (0..m).filter(|&r| row_active[r]).collect();
                return Err(Singular {
                    positions,
                    rows: rows_left,
                });
            };
            let pivot_row = std::mem::take(&mut rows[p]);
            row_active[p] = false;
            col_active[q] = false;
            for &(j, _) in &pivot_row {
                col_count[j] = col_count[j].saturating_sub(1);
            }

            let mut mults = Vec::new();
            let targets: Vec<usize> = col_rows[q]
                .iter()
                .copied()
                .filter(|&i| row_active[i])
                .collect();
            for i in targets {
                let Some(idx) = rows[i].iter().position(|&(j, _)| j == q) else {
                    continue;
                };
                let aiq = rows[i].swap_remove(idx).1;
                let l = aiq / apq;
                if l.abs() <= DROP {
                    continue;
                }
                mults.push((i, l));
                for &(j, v) in &rows[i] {
                    work[j] = v;
                    mark[j] = true;
                }
                for &(j, v) in &pivot_row {
                    if j == q {
                        continue;
                    }
                    if !mark[j] {
                        mark[j] = true;
                        work[j] = 0.0;
                        rows[i].push((j, 0.0));
                        col_rows[j].push(i);
                        col_count[j] += 1;
                    }
                    work[j] -= l * v;
                }
                let mut kept = Vec::with_capacity(rows[i].len());
                for &(j, _) in &rows[i] {
                    let v = work[j];
                    mark[j] = false;
                    if v.abs() > DROP {
                        kept.push((j, v));
                    } else {
                        col_count[j] = col_count[j].saturating_sub(1);
                    }
                }
                rows[i] = kept;
            }
            lower.push((p, mults));
            upper.push(URow {
                row: p,
                col: q,
                diag: apq,
                rest: pivot_row.into_iter().filter(|&(j, _)| j != q).collect(),
            });
        }
        Ok(Self {
            m,
            lower,
            upper,
            etas: Vec::new(),
        })
    }

    fn choose_pivot(
        rows: &[Vec<(usize, f64)>],
        col_rows: &[Vec<usize>],
        col_count: &[usize],
        row_active: &[bool],
        col_active: &[bool],
    ) -> Option<(usize, usize, f64)> {
        // Columns with the fewest entries first.
        let mut cands: Vec<(usize, usize)> = Vec::with_capacity(SEARCH_COLUMNS + 1);
        for (c, &cnt) in col_count.iter().enumerate() {
            if !col_active[c] {
                continue;
            }
            if cands.len() < SEARCH_COLUMNS || cnt < cands[cands.len() - 1].0 {
                let at = cands.partition_point(|&(k, _)| k <= cnt);
                cands.insert(at, (cnt, c));
                cands.truncate(SEARCH_COLUMNS);
            }
        }
        let best = Self::search(
            rows,
            col_rows,
            row_active,
            cands.iter().map(|&(_, c)| c),
            col_count,
        );
        if best.is_some() {
            return best;
        }
        // Fall back to every remaining column.
        Self::search(
            rows,
            col_rows,
            row_active,
            (0..col_active.len()).filter(|&c| col_active[c]),
            col_count,
        )
    }

    fn search(
        rows: &[Vec<(usize, f64)>],
        col_rows: &[Vec<usize>],
        row_active: &[bool],
        cols: impl Iterator<Item = usize>,
        col_count: &[usize],
    ) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for q in cols {
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for &i in &col_rows[q] {
                if !row_active[i] || entries.iter().any(|&(r, _)| r == i) {
                    continue;
                }
                if let Some(&(_, v)) = rows[i].iter().find(|&&(j, _)| j == q) {
                    entries.push((i, v));
                }
            }
            let max_abs = entries.iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
            if max_abs <= SINGULAR {
                continue;
            }
            let cnt = col_count[q].max(1);
            for &(i, v) in &entries {
                if v.abs() < THRESHOLD * max_abs {
                    continue;
                }
                let cost = (rows[i].len().max(1) - 1) * (cnt - 1);
                let better = match best {
                    None => true,
                    Some((bc, _, _, bv)) => cost < bc || (cost == bc && v.abs() > bv.abs()),
                };
                if better {
                    best = Some((cost, i, q, v));
                }
            }
        }
        best.map(|(_, p, q, v)| (p, q, v))
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Records the basis change at `pos` whose entering column has
    /// representation `w = B⁻¹ a` (indexed by basis position).
    pub fn push_eta(&mut self, pos: usize, w: &[f64]) {
        let rest = w
            .iter()
            .enumerate()
            .filter(|&(i, v)| i != pos && v.abs() > DROP)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: w[pos],
            rest,
        });
    }

    /// Solves `B z = b`; `b` is indexed by row, the result by basis position.
    pub fn ftran(&self, b: &[f64]) -> Vec<f64> {
        let mut work = b.to_vec();
        for (p, mults) in &self.lower {
            let bp = work[*p];
            if bp != 0.0 {
                for &(i, l) in mults {
                    work[i] -= l * bp;
                }
            }
        }
        let mut z = vec![0.0; self.m];
        for u in self.upper.iter().rev() {
            let mut v = work[u.row];
            for &(j, a) in &u.rest {
                v -= a * z[j];
            }
            z[u.col] = v / u.diag;
        }
        for eta in &self.etas {
            let zr = z[eta.pos] / eta.pivot;
            z[eta.pos] = zr;
            if zr != 0.0 {
                for &(i, w) in &eta.rest {
                    z[i] -= w * zr;
                }
            }
        }
        z
    }

    /// Solves `Bᵀ y = c`; `c` is indexed by basis position, the result by row.
    pub fn btran(&self, c: &[f64]) -> Vec<f64> {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for &(i, w) in &eta.rest {
                v -= w * c[i];
            }
            c[eta.pos] = v / eta.pivot;
        }
        let mut y = vec![0.0; self.m];
        for u in &self.upper {
            let v = c[u.col] / u.diag;
            y[u.row] = v;
            if v != 0.0 {
                for &(j, a) in &u.rest {
                    c[j] -= a * v;
                }
            }
        }
        for (p, mults) in self.lower.iter().rev() {
            let mut v = y[*p];
            for &(i, l) in mults {
                v -= l * y[i];
            }
            y[*p] = v;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m)
            .map(|c| {
                (0..m)
                    .filter(|&r| a[r][c] != 0.0)
                    .map(|r| (r, a[r][c]))
                    .collect()
            })
            .collect()
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn matvec_t(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m)
            .map(|c| (0..m).map(|r| a[r][c] * y[r]).sum())
            .collect()
    }

    #[test]
    fn solves_small_system_both_ways() {
        let a = vec![
            vec![2.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 3.0, 1.0],
            vec![1.0, 4.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 5.0],
        ];
        let f = Factor::new(4, &dense_to_cols(&a)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let z = f.ftran(&b);
        for (l, r) in matvec(&a, &z).iter().zip(&b) {
            assert!((l - r).abs() < 1e-12);
        }
        let y = f.btran(&b);
        for (l, r) in matvec_t(&a, &y).iter().zip(&b) {
            assert!((l - r).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut a = vec![
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![3.0, 0.0, 1.0],
        ];
        let mut f = Factor::new(3, &dense_to_cols(&a)).unwrap();
        let entering = vec![1.0, 1.0, 1.0];
        let w = f.ftran(&entering);
        f.push_eta(1, &w);
        for r in 0..3 {
            a[r][1] = entering[r];
        }
        let b = vec![0.3, -1.0, 2.0];
        let z = f.ftran(&b);
        for (l, r) in matvec(&a, &z).iter().zip(&b) {
            assert!((l - r).abs() < 1e-12);
        }
        let y = f.btran(&b);
        for (l, r) in matvec_t(&a, &y).iter().zip(&b) {
            assert!((l - r).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_singular_columns() {
        let a = vec![
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let err = Factor::new(3, &dense_to_cols(&a)).unwrap_err();
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows.len(), 1);
    }

    #[test]
    fn random_sparse_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = rng.gen_range(1..30);
            let mut a = vec![vec![0.0; m]; m];
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = rng.gen_range(1.0..4.0);
                for _ in 0..2 {
                    let j = rng.gen_range(0..m);
                    row[j] += rng.gen_range(-1.0..1.0);
                }
            }
            let f = Factor::new(m, &dense_to_cols(&a)).unwrap();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let z = f.ftran(&b);
            let y = f.btran(&b);
            for (l, r) in matvec(&a, &z).iter().zip(&b) {
                assert!((l - r).abs() < 1e-9);
            }
            for (l, r) in matvec_t(&a, &y).iter().zip(&b) {
                assert!((l - r).abs() < 1e-9);
            }
        }
    }
}
