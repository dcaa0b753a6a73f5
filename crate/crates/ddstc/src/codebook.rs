//! Unitary Alamouti codebooks over M-PSK, bit mapping, and differential
//! encoding of codeword streams.

use crate::error::{Error, Result};
use crate::numerics::{tol, Mat2, Vec2};
use num_complex::Complex64;
use std::f64::consts::PI;

/// One R x R unitary data codeword and its index in the codebook.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryCodeword {
    pub v: Mat2,
    pub index: usize,
}

/// The full codeword set for a two-relay Alamouti design: L = M^2 matrices
/// (1/sqrt 2) [[u1, -u2*], [u2, u1*]] with u1, u2 drawn from M-PSK.
#[derive(Clone, Debug)]
pub struct Codebook {
    m: usize,
    bits_per_symbol: usize,
    codewords: Vec<UnitaryCodeword>,
}

fn gray(m: usize) -> usize {
    m ^ (m >> 1)
}

fn gray_inv(g: usize) -> usize {
    let mut m = 0usize;
    let mut x = g;
    while x != 0 {
        m ^= x;
        x >>= 1;
    }
    m
}

/// Builds the Alamouti codebook for PSK order `m`.
pub fn build_alamouti_codebook(m: usize) -> Result<Codebook> {
    if ![2, 4, 8, 16].contains(&m) {
        return Err(Error::Config(format!(
            "unsupported PSK order {m}; expected one of 2, 4, 8, 16"
        )));
    }
    let bits_per_symbol = m.trailing_zeros() as usize;
    let psk: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64))
        .collect();
    let inv_sqrt2 = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
    let mut codewords = Vec::with_capacity(m * m);
    for m1 in 0..m {
        for m2 in 0..m {
            let u1 = psk[m1];
            let u2 = psk[m2];
            let v = Mat2([u1, -u2.conj(), u2, u1.conj()]).scale(inv_sqrt2);
            debug_assert!(v.is_unitary(tol::UNITARY_ABS));
            codewords.push(UnitaryCodeword {
                v,
                index: m1 * m + m2,
            });
        }
    }
    Ok(Codebook {
        m,
        bits_per_symbol,
        codewords,
    })
}

impl Codebook {
    /// PSK order M.
    pub fn psk_order(&self) -> usize {
        self.m
    }

    /// Number of codewords L = M^2.
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bits carried per codeword: 2 log2 M.
    pub fn bits_per_codeword(&self) -> usize {
        2 * self.bits_per_symbol
    }

    pub fn codeword(&self, index: usize) -> &UnitaryCodeword {
        &self.codewords[index]
    }

    pub fn codewords(&self) -> &[UnitaryCodeword] {
        &self.codewords
    }

    /// The PSK constellation point for symbol index `i`.
    pub fn psk(&self, i: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * i as f64 / self.m as f64)
    }

    /// Splits a codeword index into its (u1, u2) PSK symbol indices.
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        (index / self.m, index % self.m)
    }

    /// Joins (u1, u2) PSK symbol indices into a codeword index.
    pub fn join_index(&self, m1: usize, m2: usize) -> usize {
        m1 * self.m + m2
    }

    /// Maps a bit string of width 2 log2 M to a codeword. Each PSK symbol is
    /// Gray-labeled independently; the first half of the bits selects u1.
    pub fn bits_to_codeword(&self, bits: &[bool]) -> Result<&UnitaryCodeword> {
        if bits.len() != self.bits_per_codeword() {
            return Err(Error::Domain(format!(
                "expected {} bits, got {}",
                self.bits_per_codeword(),
                bits.len()
            )));
        }
        let b = self.bits_per_symbol;
        let m1 = gray_inv(pack_bits(&bits[..b]));
        let m2 = gray_inv(pack_bits(&bits[b..]));
        Ok(&self.codewords[self.join_index(m1, m2)])
    }

    /// Inverse of [`Codebook::bits_to_codeword`].
    pub fn codeword_to_bits(&self, index: usize) -> Vec<bool> {
        let (m1, m2) = self.split_index(index);
        let b = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(2 * b);
        unpack_bits(gray(m1), b, &mut bits);
        unpack_bits(gray(m2), b, &mut bits);
        bits
    }

    /// Bit errors between two codeword indices under the Gray labeling.
    pub fn bit_errors(&self, sent: usize, detected: usize) -> usize {
        let (s1, s2) = self.split_index(sent);
        let (d1, d2) = self.split_index(detected);
        ((gray(s1) ^ gray(d1)).count_ones() + (gray(s2) ^ gray(d2)).count_ones()) as usize
    }
}

fn pack_bits(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

fn unpack_bits(value: usize, width: usize, out: &mut Vec<bool>) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

/// A differentially encoded transmit stream: K codewords produce K+1
/// transmitted vectors with s[0] = [1, 0]^t.
#[derive(Clone, Debug)]
pub struct TxFrame {
    pub s: Vec<Vec2>,
    pub indices: Vec<usize>,
}

impl TxFrame {
    /// Number of transmitted blocks, one more than the codeword count.
    pub fn blocks(&self) -> usize {
        self.s.len()
    }
}

/// Differential recursion over explicit matrices: s[k] = V[k] s[k-1].
pub fn differential_encode_mats(mats: &[Mat2]) -> Vec<Vec2> {
    let mut s = Vec::with_capacity(mats.len() + 1);
    s.push(Vec2([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]));
    for v in mats {
        let next = v.mul_vec(s.last().unwrap());
        s.push(next);
    }
    s
}

/// Differentially encodes a sequence of codeword indices.
pub fn differential_encode(cb: &Codebook, indices: &[usize]) -> TxFrame {
    let mats: Vec<Mat2> = indices.iter().map(|&i| cb.codeword(i).v).collect();
    TxFrame {
        s: differential_encode_mats(&mats),
        indices: indices.to_vec(),
    }
}
