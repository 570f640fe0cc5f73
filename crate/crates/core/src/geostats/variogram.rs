use super::{check_lag, for_each_pair, Axis, StatCurve, StatKind};
use crate::error::Result;
use crate::grid::FaciesGrid;

/// Indicator variogram `γ(h) = ½ · mean over pairs at lag h of (I(u) - I(u+h))²`
/// for `h = 0..=max_lag`.
///
/// For a 0/1 indicator the squared difference is 1 exactly when one cell is
/// `facies` and the other is not, so the value is an exact ratio of counts and
/// the curves of the two facies of a binary grid coincide bit for bit.
pub fn indicator_variogram(grid: &FaciesGrid, facies: u8, axis: Axis, max_lag: usize) -> Result<StatCurve> {
    let dims = grid.dims();
    check_lag(dims, axis, max_lag)?;
    let v = grid.values();
    let points = (0..=max_lag)
        .map(|h| {
            let mut pairs = 0usize;
            let mut differing = 0usize;
            for_each_pair(dims, axis, h, |a, b| {
                pairs += 1;
                differing += ((v[a] == facies) != (v[b] == facies)) as usize;
            });
            (h, Some(differing as f64 / (2.0 * pairs as f64)))
        })
        .collect();
    Ok(StatCurve { facies, axis, kind: StatKind::Variogram, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridDims, CHANNEL, MUD};

    #[test]
    fn constant_grid_is_flat_zero() {
        let g = FaciesGrid::filled(GridDims::new(5, 4, 3).unwrap(), CHANNEL).unwrap();
        for facies in [MUD, CHANNEL] {
            for axis in Axis::ALL {
                let c = indicator_variogram(&g, facies, axis, 2).unwrap();
                assert!(c.points.iter().all(|p| p.1 == Some(0.0)));
            }
        }
    }

    #[test]
    fn alternating_stripes() {
        let g = FaciesGrid::from_fn(GridDims::new(6, 2, 2).unwrap(), |i, _, _| (i % 2) as u8).unwrap();
        let c = indicator_variogram(&g, CHANNEL, Axis::X, 3).unwrap();
        assert_eq!(c.value(0), Some(0.0));
        assert_eq!(c.value(1), Some(0.5));
        assert_eq!(c.value(2), Some(0.0));
        assert_eq!(c.value(3), Some(0.5));
        // constant along y
        assert!(indicator_variogram(&g, CHANNEL, Axis::Y, 1).unwrap().points.iter().all(|p| p.1 == Some(0.0)));
    }

    #[test]
    fn lag_must_fit() {
        let g = FaciesGrid::filled(GridDims::new(5, 4, 3).unwrap(), MUD).unwrap();
        assert!(indicator_variogram(&g, MUD, Axis::Z, 3).is_err());
        assert!(indicator_variogram(&g, MUD, Axis::Z, 2).is_ok());
    }
}
