//! Layer primitives: 2-D convolution (stride, dilation, zero padding), ReLU,
//! and channel concatenation, each with an exact backward pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::tensor::Tensor4;

/// Convolution geometry. Output spatial size follows
/// `floor((in + 2*pad - dilation*(k-1) - 1) / stride) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub dilation: usize,
    pub padding: usize,
}

impl ConvSpec {
    pub fn k3(in_ch: usize, out_ch: usize, stride: usize, dilation: usize) -> Self {
        // padding chosen so stride-1 keeps size and stride-2 halves even sizes
        ConvSpec {
            in_ch,
            out_ch,
            kernel: 3,
            stride,
            dilation,
            padding: dilation,
        }
    }

    pub fn k1(in_ch: usize, out_ch: usize) -> Self {
        ConvSpec {
            in_ch,
            out_ch,
            kernel: 1,
            stride: 1,
            dilation: 1,
            padding: 0,
        }
    }

    pub fn out_size(&self, in_size: usize) -> Result<usize> {
        let span = self.dilation * (self.kernel - 1) + 1;
        let padded = in_size + 2 * self.padding;
        if padded < span {
            return Err(Error::domain(format!(
                "input extent {} too small for kernel span {}",
                in_size, span
            )));
        }
        Ok((padded - span) / self.stride + 1)
    }

    pub fn weight_len(&self) -> usize {
        self.out_ch * self.in_ch * self.kernel * self.kernel
    }
}

/// One step of a sequential stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv(ConvSpec),
    Relu,
}

/// y = conv(x, w) + b with zero padding outside the input extent.
pub fn conv2d_forward(
    x: &Tensor4,
    w: &[f64],
    b: &[f64],
    spec: &ConvSpec,
    layer_name: &str,
) -> Result<Tensor4> {
    let (n, c, h, wd) = x.shape();
    if c != spec.in_ch {
        return Err(Error::shape(
            layer_name,
            format!("input has {} channels, expected {}", c, spec.in_ch),
        ));
    }
    if w.len() != spec.weight_len() || b.len() != spec.out_ch {
        return Err(Error::shape(
            layer_name,
            format!(
                "parameter buffers ({}, {}) do not match spec ({}, {})",
                w.len(),
                b.len(),
                spec.weight_len(),
                spec.out_ch
            ),
        ));
    }
    let oh = spec.out_size(h)?;
    let ow = spec.out_size(wd)?;
    let mut y = Tensor4::zeros(n, spec.out_ch, oh, ow);
    let k = spec.kernel;
    for bn in 0..n {
        for oc in 0..spec.out_ch {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = b[oc];
                    for ic in 0..spec.in_ch {
                        for ky in 0..k {
                            let iy = (oy * spec.stride + ky * spec.dilation) as isize
                                - spec.padding as isize;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let ix = (ox * spec.stride + kx * spec.dilation) as isize
                                    - spec.padding as isize;
                                if ix < 0 || ix >= wd as isize {
                                    continue;
                                }
                                let wi = ((oc * spec.in_ch + ic) * k + ky) * k + kx;
                                acc += w[wi] * x.get(bn, ic, iy as usize, ix as usize);
                            }
                        }
                    }
                    y.set(bn, oc, oy, ox, acc);
                }
            }
        }
    }
    Ok(y)
}

/// Gradients of a convolution: returns (dL/dx, dL/dw, dL/db) given dL/dy.
pub fn conv2d_backward(
    x: &Tensor4,
    w: &[f64],
    spec: &ConvSpec,
    grad_out: &Tensor4,
) -> (Tensor4, Vec<f64>, Vec<f64>) {
    let (n, _, h, wd) = x.shape();
    let (_, _, oh, ow) = grad_out.shape();
    let k = spec.kernel;
    let mut gx = Tensor4::zeros(n, spec.in_ch, h, wd);
    let mut gw = vec![0.0; spec.weight_len()];
    let mut gb = vec![0.0; spec.out_ch];
    for bn in 0..n {
        for oc in 0..spec.out_ch {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = grad_out.get(bn, oc, oy, ox);
                    if g == 0.0 {
                        continue;
                    }
                    gb[oc] += g;
                    for ic in 0..spec.in_ch {
                        for ky in 0..k {
                            let iy = (oy * spec.stride + ky * spec.dilation) as isize
                                - spec.padding as isize;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let ix = (ox * spec.stride + kx * spec.dilation) as isize
                                    - spec.padding as isize;
                                if ix < 0 || ix >= wd as isize {
                                    continue;
                                }
                                let wi = ((oc * spec.in_ch + ic) * k + ky) * k + kx;
                                gw[wi] += g * x.get(bn, ic, iy as usize, ix as usize);
                                gx.add_at(bn, ic, iy as usize, ix as usize, g * w[wi]);
                            }
                        }
                    }
                }
            }
        }
    }
    (gx, gw, gb)
}

pub fn relu_forward(x: &Tensor4) -> Tensor4 {
    let mut y = x.clone();
    for v in y.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    y
}

pub fn relu_backward(x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
    let mut gx = grad_out.clone();
    for (g, &v) in gx.data_mut().iter_mut().zip(x.data().iter()) {
        if v <= 0.0 {
            *g = 0.0;
        }
    }
    gx
}

/// Concatenates two tensors along the channel axis.
pub fn concat_forward(a: &Tensor4, b: &Tensor4, layer_name: &str) -> Result<Tensor4> {
    let (na, ca, ha, wa) = a.shape();
    let (nb, cb, hb, wb) = b.shape();
    if na != nb || ha != hb || wa != wb {
        return Err(Error::shape(
            layer_name,
            format!(
                "cannot concat {:?} with {:?}: batch/spatial dims differ",
                a.shape(),
                b.shape()
            ),
        ));
    }
    let mut y = Tensor4::zeros(na, ca + cb, ha, wa);
    for n in 0..na {
        for c in 0..ca {
            for yy in 0..ha {
                for xx in 0..wa {
                    y.set(n, c, yy, xx, a.get(n, c, yy, xx));
                }
            }
        }
        for c in 0..cb {
            for yy in 0..ha {
                for xx in 0..wa {
                    y.set(n, ca + c, yy, xx, b.get(n, c, yy, xx));
                }
            }
        }
    }
    Ok(y)
}

/// Splits a concat gradient back into the two source gradients.
pub fn concat_backward(grad_out: &Tensor4, ca: usize) -> (Tensor4, Tensor4) {
    let (n, c, h, w) = grad_out.shape();
    let cb = c - ca;
    let mut ga = Tensor4::zeros(n, ca, h, w);
    let mut gb = Tensor4::zeros(n, cb, h, w);
    for bn in 0..n {
        for ch in 0..ca {
            for y in 0..h {
                for x in 0..w {
                    ga.set(bn, ch, y, x, grad_out.get(bn, ch, y, x));
                }
            }
        }
        for ch in 0..cb {
            for y in 0..h {
                for x in 0..w {
                    gb.set(bn, ch, y, x, grad_out.get(bn, ca + ch, y, x));
                }
            }
        }
    }
    (ga, gb)
}
