use crate::Scalar;

/// Points `lo, lo + step, lo + 2 step, ...` up to `hi`, always ending
/// exactly at `hi`. A point closer than `1e-9 step` to `hi` is replaced by
/// `hi` itself.
pub(crate) fn span<T: Scalar>(lo: T, hi: T, step: T) -> Vec<T> {
    let mut pts = Vec::new();
    let mut i = 0usize;
    loop {
        let x = lo + T::from_usize(i).unwrap() * step;
        if x >= hi - step * T::lit(1e-9) {
            break;
        }
        pts.push(x);
        i += 1;
    }
    pts.push(hi);
    pts
}
