use super::{NetworkError, Transfer};
use crate::masking::MaskMatrix;
use crate::numerics::{Mat, Prng};

/// A conditional layer: one `l x e` weight matrix per window offset
/// `u = -n..=n`. Output frame `t` is
/// `f(b + sum_u x[t + n + u] . W_u)`, so a segment of `T` frames yields
/// `T - 2n` output frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ClnnLayer {
    pub input_len: usize,
    pub width: usize,
    pub order: usize,
    /// `2n + 1` matrices; index 0 holds `W_{-n}`, index `n` the window middle.
    pub weights: Vec<Mat>,
    pub bias: Vec<f64>,
    pub transfer: Transfer,
}

impl ClnnLayer {
    pub fn zeros(input_len: usize, width: usize, order: usize, transfer: Transfer) -> Self {
        Self {
            input_len,
            width,
            order,
            weights: vec![Mat::zeros(input_len, width); 2 * order + 1],
            bias: vec![0.0; width],
            transfer,
        }
    }

    /// Uniform weights in `+-sqrt(6 / (l * d + e))`, zero bias.
    pub fn random(input_len: usize, width: usize, order: usize, transfer: Transfer, rng: &mut Prng) -> Self {
        let mut layer = Self::zeros(input_len, width, order, transfer);
        let d = 2 * order + 1;
        let limit = (6.0 / (input_len * d + width) as f64).sqrt();
        for w in &mut layer.weights {
            for v in w.as_mut_slice() {
                *v = rng.uniform(-limit, limit);
            }
        }
        layer
    }

    pub fn window(&self) -> usize {
        2 * self.order + 1
    }

    /// The matrix for window offset `u` in `-n..=n`.
    pub fn weight(&self, u: isize) -> &Mat {
        &self.weights[(u + self.order as isize) as usize]
    }

    pub fn weight_mut(&mut self, u: isize) -> &mut Mat {
        let n = self.order as isize;
        &mut self.weights[(u + n) as usize]
    }

    pub fn param_count(&self) -> usize {
        self.window() * self.input_len * self.width + self.width
    }

    fn check_segment(&self, segment: &Mat) -> Result<usize, NetworkError> {
        if segment.cols() != self.input_len {
            return Err(NetworkError::WidthMismatch {
                expected: self.input_len,
                got: segment.cols(),
            });
        }
        if segment.rows() < self.window() {
            return Err(NetworkError::SegmentTooShort {
                frames: segment.rows(),
                needed: self.window(),
            });
        }
        Ok(segment.rows() - 2 * self.order)
    }

    /// Pre-activations and activations. `supports[j]` lists the input rows
    /// column `j` may read; `None` means every row.
    pub(crate) fn forward_parts(
        &self,
        segment: &Mat,
        supports: Option<&[Vec<usize>]>,
    ) -> Result<(Mat, Mat), NetworkError> {
        let out_frames = self.check_segment(segment)?;
        let (l, e, d) = (self.input_len, self.width, self.window());
        let mut pre = Mat::zeros(out_frames, e);
        for t in 0..out_frames {
            let acc = pre.row_mut(t);
            acc.copy_from_slice(&self.bias);
            match supports {
                None => {
                    for u in 0..d {
                        let x = segment.row(t + u);
                        let w = &self.weights[u];
                        for i in 0..l {
                            let xi = x[i];
                            for (a, &wij) in acc.iter_mut().zip(w.row(i)) {
                                *a += xi * wij;
                            }
                        }
                    }
                }
                Some(supports) => {
                    // Same (u, i) accumulation order as the dense branch.
                    for (j, rows) in supports.iter().enumerate() {
                        let mut a = acc[j];
                        for u in 0..d {
                            let x = segment.row(t + u);
                            let w = self.weights[u].as_slice();
                            for &i in rows {
                                a += x[i] * w[i * e + j];
                            }
                        }
                        acc[j] = a;
                    }
                }
            }
        }
        let mut out = pre.clone();
        for v in out.as_mut_slice() {
            *v = self.transfer.apply(*v);
        }
        Ok((pre, out))
    }

    /// Accumulates weight and bias gradients into `gw` (one flat `l * e`
    /// buffer per window offset) and `gb`; returns the gradient with respect
    /// to the input segment when `need_input` is set.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn backward_parts(
        &self,
        segment: &Mat,
        pre: &Mat,
        out: &Mat,
        upstream: &Mat,
        supports: Option<&[Vec<usize>]>,
        gw: &mut [Vec<f64>],
        gb: &mut [f64],
        need_input: bool,
    ) -> Result<Option<Mat>, NetworkError> {
        let out_frames = self.check_segment(segment)?;
        if upstream.shape() != (out_frames, self.width) || pre.shape() != upstream.shape() {
            return Err(NetworkError::ShapeMismatch(format!(
                "upstream gradient is {}x{}, layer output is {}x{}",
                upstream.rows(),
                upstream.cols(),
                out_frames,
                self.width
            )));
        }
        let (l, e, d) = (self.input_len, self.width, self.window());
        debug_assert!(gw.len() == d && gw.iter().all(|g| g.len() == l * e) && gb.len() == e);

        let mut delta = upstream.clone();
        for ((g, &p), &o) in delta
            .as_mut_slice()
            .iter_mut()
            .zip(pre.as_slice())
            .zip(out.as_slice())
        {
            *g *= self.transfer.derivative(p, o);
        }

        for t in 0..out_frames {
            for (b, &g) in gb.iter_mut().zip(delta.row(t)) {
                *b += g;
            }
        }
        let mut gx = need_input.then(|| Mat::zeros(segment.rows(), l));
        match supports {
            None => {
                for u in 0..d {
                    let w = &self.weights[u];
                    let gwu = &mut gw[u];
                    for t in 0..out_frames {
                        let dt = delta.row(t);
                        let x = segment.row(t + u);
                        for i in 0..l {
                            let xi = x[i];
                            for (g, &dj) in gwu[i * e..(i + 1) * e].iter_mut().zip(dt) {
                                *g += xi * dj;
                            }
                        }
                        if let Some(gx) = gx.as_mut() {
                            let gxr = gx.row_mut(t + u);
                            for i in 0..l {
                                let s: f64 = dt.iter().zip(w.row(i)).map(|(&dj, &wij)| dj * wij).sum();
                                gxr[i] += s;
                            }
                        }
                    }
                }
            }
            Some(supports) => {
                for u in 0..d {
                    let w = self.weights[u].as_slice();
                    let gwu = &mut gw[u];
                    for t in 0..out_frames {
                        let dt = delta.row(t);
                        let x = segment.row(t + u);
                        for (j, rows) in supports.iter().enumerate() {
                            let dj = dt[j];
                            for &i in rows {
                                gwu[i * e + j] += x[i] * dj;
                            }
                        }
                        if let Some(gx) = gx.as_mut() {
                            let gxr = gx.row_mut(t + u);
                            for (j, rows) in supports.iter().enumerate() {
                                let dj = dt[j];
                                for &i in rows {
                                    gxr[i] += dj * w[i * e + j];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(gx)
    }
}

/// Gradients of a conditional layer's parameters and input segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClnnGrads {
    pub weights: Vec<Mat>,
    pub bias: Vec<f64>,
    pub input: Mat,
}

/// A conditional layer whose weights are multiplied element-wise by a
/// fixed binary mask before use.
#[derive(Debug, Clone, PartialEq)]
pub struct MclnnLayer {
    pub base: ClnnLayer,
    mask: MaskMatrix,
    supports: Vec<Vec<usize>>,
}

impl MclnnLayer {
    pub fn new(base: ClnnLayer, mask: MaskMatrix) -> Result<Self, NetworkError> {
        if mask.rows() != base.input_len || mask.cols() != base.width {
            return Err(NetworkError::MaskShapeMismatch {
                rows: base.input_len,
                cols: base.width,
                got_rows: mask.rows(),
                got_cols: mask.cols(),
            });
        }
        let supports = mask.column_supports();
        Ok(Self {
            base,
            mask,
            supports,
        })
    }

    pub fn mask(&self) -> &MaskMatrix {
        &self.mask
    }

    /// `W_u * M` for every offset.
    pub fn effective_weights(&self) -> Vec<Mat> {
        self.base
            .weights
            .iter()
            .map(|w| {
                let mut z = w.clone();
                for (v, &m) in z.as_mut_slice().iter_mut().zip(self.mask.bits()) {
                    if m == 0 {
                        *v = 0.0;
                    }
                }
                z
            })
            .collect()
    }

    fn supports(&self) -> Option<&[Vec<usize>]> {
        // The dense loop is bit-identical when nothing is masked.
        if self.mask.is_all_ones() {
            None
        } else {
            Some(&self.supports)
        }
    }
}

pub fn clnn_forward(layer: &ClnnLayer, segment: &Mat) -> Result<Mat, NetworkError> {
    Ok(layer.forward_parts(segment, None)?.1)
}

pub fn mclnn_forward(layer: &MclnnLayer, segment: &Mat) -> Result<Mat, NetworkError> {
    Ok(layer.base.forward_parts(segment, layer.supports())?.1)
}

fn backward_fresh(
    layer: &ClnnLayer,
    segment: &Mat,
    upstream: &Mat,
    supports: Option<&[Vec<usize>]>,
) -> Result<ClnnGrads, NetworkError> {
    let (pre, out) = layer.forward_parts(segment, supports)?;
    let mut gw = vec![vec![0.0; layer.input_len * layer.width]; layer.window()];
    let mut gb = vec![0.0; layer.width];
    let input = layer
        .backward_parts(segment, &pre, &out, upstream, supports, &mut gw, &mut gb, true)?
        .expect("input gradient requested");
    Ok(ClnnGrads {
        weights: gw
            .into_iter()
            .map(|g| Mat::from_vec(layer.input_len, layer.width, g).expect("sized above"))
            .collect(),
        bias: gb,
        input,
    })
}

/// Backward pass given the upstream gradient with respect to the layer output.
pub fn clnn_backward(layer: &ClnnLayer, segment: &Mat, upstream: &Mat) -> Result<ClnnGrads, NetworkError> {
    backward_fresh(layer, segment, upstream, None)
}

/// As [`clnn_backward`]; weight gradients at masked positions are exactly 0.
pub fn mclnn_backward(layer: &MclnnLayer, segment: &Mat, upstream: &Mat) -> Result<ClnnGrads, NetworkError> {
    backward_fresh(&layer.base, segment, upstream, layer.supports())
}

/// One layer of the temporal stack.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalLayer {
    Clnn(ClnnLayer),
    Mclnn(MclnnLayer),
}

impl TemporalLayer {
    pub fn base(&self) -> &ClnnLayer {
        match self {
            TemporalLayer::Clnn(l) => l,
            TemporalLayer::Mclnn(l) => &l.base,
        }
    }

    pub fn base_mut(&mut self) -> &mut ClnnLayer {
        match self {
            TemporalLayer::Clnn(l) => l,
            TemporalLayer::Mclnn(l) => &mut l.base,
        }
    }

    pub fn mask(&self) -> Option<&MaskMatrix> {
        match self {
            TemporalLayer::Clnn(_) => None,
            TemporalLayer::Mclnn(l) => Some(l.mask()),
        }
    }

    fn supports(&self) -> Option<&[Vec<usize>]> {
        match self {
            TemporalLayer::Clnn(_) => None,
            TemporalLayer::Mclnn(l) => l.supports(),
        }
    }

    pub fn forward(&self, segment: &Mat) -> Result<Mat, NetworkError> {
        Ok(self.forward_parts(segment)?.1)
    }

    pub(crate) fn forward_parts(&self, segment: &Mat) -> Result<(Mat, Mat), NetworkError> {
        self.base().forward_parts(segment, self.supports())
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn backward_parts(
        &self,
        segment: &Mat,
        pre: &Mat,
        out: &Mat,
        upstream: &Mat,
        gw: &mut [Vec<f64>],
        gb: &mut [f64],
        need_input: bool,
    ) -> Result<Option<Mat>, NetworkError> {
        self.base()
            .backward_parts(segment, pre, out, upstream, self.supports(), gw, gb, need_input)
    }
}
