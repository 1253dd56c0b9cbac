/// Richardson-Neville extrapolation of `g(ε)` to ε → 0 from samples at `eps0·ratio^k`,
/// assuming an error expansion in integer powers of ε.
///
/// Returns (limit, estimate of its error from the last two diagonal entries).
pub fn extrapolate<G: FnMut(f64) -> f64>(mut g: G, eps0: f64, ratio: f64, levels: usize) -> (f64, f64) {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut eps = eps0;
    for k in 0..levels {
        let mut row = vec![g(eps)];
        for j in 1..=k {
            let factor = ratio.powi(-(j as i32));
            let prev = &table[k - 1];
            let v = (factor * row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        table.push(row);
        eps *= ratio;
    }
    let last = table.last().unwrap();
    let best = *last.last().unwrap();
    let err = if last.len() > 1 { (best - last[last.len() - 2]).abs() } else { f64::INFINITY };
    (best, err)
}
