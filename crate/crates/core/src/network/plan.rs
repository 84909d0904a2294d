use super::NetworkError;

/// Frame bookkeeping for a stack of conditional layers.
///
/// Each layer of order `n` consumes `2n` frames (n on each side of the
/// window middle), so a stack of `m` layers fed a segment of
/// `q = 2n * m + k` frames leaves exactly `k` frames for pooling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub order: usize,
    pub layers: usize,
    pub surviving: usize,
    pub window: usize,
    pub segment: usize,
    pub per_layer_out: Vec<usize>,
}

pub fn plan_windows(order: usize, layers: usize, surviving: usize) -> Result<WindowPlan, NetworkError> {
    if order < 1 || layers < 1 || surviving < 1 {
        return Err(NetworkError::BadOrder {
            n: order,
            m: layers,
            k: surviving,
        });
    }
    let segment = 2 * order * layers + surviving;
    let mut per_layer_out = Vec::with_capacity(layers);
    let mut frames = segment;
    for _ in 0..layers {
        frames -= 2 * order;
        per_layer_out.push(frames);
    }
    Ok(WindowPlan {
        order,
        layers,
        surviving,
        window: 2 * order + 1,
        segment,
        per_layer_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_layer_example() {
        let p = plan_windows(4, 3, 5).unwrap();
        assert_eq!(p.segment, 29);
        assert_eq!(p.window, 9);
        assert_eq!(p.per_layer_out, vec![21, 13, 5]);
    }

    #[test]
    fn ballroom_plan() {
        let p = plan_windows(20, 1, 56).unwrap();
        assert_eq!(p.segment, 96);
        assert_eq!(p.window, 41);
        assert_eq!(p.per_layer_out, vec![56]);
    }

    #[test]
    fn smallest_plan() {
        let p = plan_windows(1, 1, 1).unwrap();
        assert_eq!((p.segment, p.window), (3, 3));
        assert_eq!(p.per_layer_out, vec![1]);
    }

    #[test]
    fn rejects_zero() {
        for (n, m, k) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            assert!(matches!(plan_windows(n, m, k), Err(NetworkError::BadOrder { .. })));
        }
    }

    #[test]
    fn invariants_hold() {
        for n in 1..6 {
            for m in 1..5 {
                for k in 1..8 {
                    let p = plan_windows(n, m, k).unwrap();
                    assert_eq!(p.window, 2 * n + 1);
                    for (i, &out) in p.per_layer_out.iter().enumerate() {
                        assert_eq!(out, p.segment - 2 * n * (i + 1));
                    }
                    assert_eq!(*p.per_layer_out.last().unwrap(), k);
                }
            }
        }
    }
}
