//! Systematic MDS layer over GF(256).
//!
//! The generator is `[I_L; P]` where `P` is a Cauchy matrix
//! `P[i][j] = 1 / (x_i + y_j)` with `y_j = j`, `x_i = L + i`, rescaled so its
//! first row and first column are all ones. Row and column scaling keeps
//! every square submatrix of `P` invertible, so any `L` rows of the
//! generator form an invertible matrix. With a single parity block the code
//! is plain XOR parity, and with `L = 1` it is a repetition code.
//!
//! Symbols are bytes. The padded codeword is split into `L` contiguous data
//! blocks and the code acts column-wise (byte position by byte position).

use serde::{Deserialize, Serialize};

use super::gf256;
use super::MulticastCodeword;
use crate::error::{invalid, Error, Result};

/// Longest code supported by the byte field.
pub const MAX_BLOCKS: usize = 255;

/// Description of the field and code construction, carried with every block set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub field: String,
    pub primitive_poly: u16,
    pub generator: u8,
    pub construction: String,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            field: "GF(2^8)".into(),
            primitive_poly: gf256::PRIMITIVE_POLY,
            generator: gf256::GENERATOR,
            construction: "systematic [I; normalized Cauchy], y_j = j, x_i = L + i".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsBlockSet {
    pub n_total: usize,
    pub k_data: usize,
    pub total_bits: u64,
    pub blocks: Vec<Vec<u8>>,
    pub field_spec: FieldSpec,
}

impl MdsBlockSet {
    pub fn block_bytes(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    /// Concatenated frames `index (u8) | length (u32, big-endian) | payload`.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.blocks.len() * (5 + self.block_bytes()));
        for (i, b) in self.blocks.iter().enumerate() {
            out.extend_from_slice(&encode_frame(i as u8, b));
        }
        out
    }
}

pub fn encode_frame(index: u8, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + payload.len());
    out.push(index);
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(payload);
    out
}

/// Splits a byte stream into `(index, payload)` frames.
pub fn parse_frames(mut bytes: &[u8]) -> Result<Vec<(usize, Vec<u8>)>> {
    let mut frames = Vec::new();
    while !bytes.is_empty() {
        if bytes.len() < 5 {
            return Err(Error::Integrity(format!(
                "truncated frame header ({} trailing bytes)",
                bytes.len()
            )));
        }
        let index = bytes[0] as usize;
        let len = u32::from_be_bytes([bytes[1], bytes[2], bytes[3], bytes[4]]) as usize;
        let rest = &bytes[5..];
        if rest.len() < len {
            return Err(Error::Integrity(format!(
                "frame {index} declares {len} bytes but only {} remain",
                rest.len()
            )));
        }
        frames.push((index, rest[..len].to_vec()));
        bytes = &rest[len..];
    }
    Ok(frames)
}

fn check_code(l: usize, n_e: usize) -> Result<()> {
    if l == 0 || l > n_e {
        return invalid(format!("need 1 <= L <= N_E, got L={l}, N_E={n_e}"));
    }
    if n_e > MAX_BLOCKS {
        return invalid(format!("N_E={n_e} exceeds the GF(256) code length limit {MAX_BLOCKS}"));
    }
    Ok(())
}

/// Parity part of the generator: `(n_e - l) x l`.
pub fn parity_matrix(l: usize, n_e: usize) -> Result<Vec<Vec<u8>>> {
    check_code(l, n_e)?;
    let rows = n_e - l;
    let mut p: Vec<Vec<u8>> = (0..rows)
        .map(|i| (0..l).map(|j| gf256::inv(((l + i) as u8) ^ (j as u8))).collect())
        .collect();
    if rows == 0 {
        return Ok(p);
    }
    for j in 0..l {
        let c = gf256::inv(p[0][j]);
        for row in p.iter_mut() {
            row[j] = gf256::mul(row[j], c);
        }
    }
    for row in p.iter_mut() {
        let r = gf256::inv(row[0]);
        for v in row.iter_mut() {
            *v = gf256::mul(*v, r);
        }
    }
    Ok(p)
}

/// Row `index` of the full `n_e x l` generator.
fn generator_row(index: usize, l: usize, parity: &[Vec<u8>]) -> Vec<u8> {
    if index < l {
        (0..l).map(|j| u8::from(j == index)).collect()
    } else {
        parity[index - l].clone()
    }
}

pub fn block_bytes_for(total_bits: u64, l: usize) -> usize {
    let bytes = total_bits.div_ceil(8) as usize;
    bytes.div_ceil(l)
}

/// Encodes raw codeword bytes (`total_bits` significant bits, MSB first).
pub fn mds_encode_bytes(data: &[u8], total_bits: u64, l: usize, n_e: usize) -> Result<MdsBlockSet> {
    check_code(l, n_e)?;
    let needed = total_bits.div_ceil(8) as usize;
    if data.len() != needed {
        return invalid(format!(
            "codeword has {} bytes but total_bits={total_bits} needs {needed}",
            data.len()
        ));
    }
    let bb = block_bytes_for(total_bits, l);
    let mut padded = data.to_vec();
    padded.resize(bb * l, 0);
    let data_blocks: Vec<Vec<u8>> = padded.chunks(bb.max(1)).map(<[u8]>::to_vec).collect();
    let data_blocks = if bb == 0 { vec![Vec::new(); l] } else { data_blocks };
    let parity = parity_matrix(l, n_e)?;
    let mut blocks = data_blocks.clone();
    for row in &parity {
        let mut out = vec![0u8; bb];
        for (coef, block) in row.iter().zip(&data_blocks) {
            gf256::mul_add_slice(&mut out, block, *coef);
        }
        blocks.push(out);
    }
    Ok(MdsBlockSet {
        n_total: n_e,
        k_data: l,
        total_bits,
        blocks,
        field_spec: FieldSpec::default(),
    })
}

pub fn mds_encode(codeword: &MulticastCodeword, l: usize, n_e: usize) -> Result<MdsBlockSet> {
    mds_encode_bytes(&codeword.to_bytes(), codeword.total_bits, l, n_e)
}

/// Rebuilds the codeword from at least `l` distinct blocks (the first `l` are used).
pub fn mds_decode(blocks: &[(usize, Vec<u8>)], l: usize, n_e: usize, total_bits: u64) -> Result<Vec<u8>> {
    check_code(l, n_e)?;
    if blocks.len() < l {
        return invalid(format!("need {l} blocks to decode, got {}", blocks.len()));
    }
    let mut seen = vec![false; n_e];
    for (idx, _) in blocks {
        if *idx >= n_e {
            return invalid(format!("block index {idx} out of range 0..{n_e}"));
        }
        if seen[*idx] {
            return invalid(format!("duplicate block index {idx}"));
        }
        seen[*idx] = true;
    }
    let bb = block_bytes_for(total_bits, l);
    let used = &blocks[..l];
    if let Some((idx, b)) = used.iter().find(|(_, b)| b.len() != bb) {
        return Err(Error::Integrity(format!(
            "block {idx} has {} bytes, expected {bb}",
            b.len()
        )));
    }
    let parity = parity_matrix(l, n_e)?;
    let rows: Vec<Vec<u8>> = used.iter().map(|(i, _)| generator_row(*i, l, &parity)).collect();
    let inverse = gf256::invert(&rows)
        .ok_or_else(|| Error::Numerical("generator submatrix is singular".into()))?;
    let mut out = Vec::with_capacity(bb * l);
    for inv_row in &inverse {
        let mut block = vec![0u8; bb];
        for (coef, (_, received)) in inv_row.iter().zip(used) {
            gf256::mul_add_slice(&mut block, received, *coef);
        }
        out.extend_from_slice(&block);
    }
    let bytes = total_bits.div_ceil(8) as usize;
    out.truncate(bytes);
    let spare = (bytes as u64 * 8 - total_bits) as u32;
    if spare > 0 {
        if let Some(last) = out.last_mut() {
            *last &= 0xFFu8 << spare;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bytes(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random()).collect()
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        super::super::subsets(n, k)
    }

    #[test]
    fn single_parity_is_xor() {
        let data: Vec<u8> = (0..16).collect();
        let set = mds_encode_bytes(&data, 128, 2, 3).unwrap();
        let x: Vec<u8> = set.blocks[0].iter().zip(&set.blocks[1]).map(|(a, b)| a ^ b).collect();
        assert_eq!(set.blocks[2], x);
        let rec = mds_decode(&[(0, set.blocks[0].clone()), (2, set.blocks[2].clone())], 2, 3, 128).unwrap();
        assert_eq!(rec, data);
    }

    #[test]
    fn l1_is_repetition() {
        let data = vec![9u8, 200, 3, 0, 17];
        let set = mds_encode_bytes(&data, 40, 1, 4).unwrap();
        for b in &set.blocks {
            assert_eq!(b, &data);
        }
    }

    #[test]
    fn systematic_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_bytes(&mut rng, 61);
        let set = mds_encode_bytes(&data, 61 * 8, 4, 7).unwrap();
        let mut joined: Vec<u8> = set.blocks[..4].concat();
        assert_eq!(joined.len(), 64);
        joined.truncate(61);
        assert_eq!(joined, data);
        let rec = mds_decode(
            &(0..4).map(|i| (i, set.blocks[i].clone())).collect::<Vec<_>>(),
            4,
            7,
            61 * 8,
        )
        .unwrap();
        assert_eq!(rec, data);
    }

    #[test]
    fn every_subset_decodes_up_to_eight_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n_e in 1..=8 {
            for l in 1..=n_e {
                let data = random_bytes(&mut rng, 37);
                let set = mds_encode_bytes(&data, 37 * 8, l, n_e).unwrap();
                for s in subsets(n_e, l) {
                    let chosen: Vec<_> = s.iter().map(|&i| (i, set.blocks[i].clone())).collect();
                    assert_eq!(mds_decode(&chosen, l, n_e, 37 * 8).unwrap(), data, "L={l} N_E={n_e} {s:?}");
                }
            }
        }
    }

    #[test]
    fn random_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n_e = rng.random_range(1..=40);
            let l = rng.random_range(1..=n_e);
            let len = rng.random_range(0..300);
            let data = random_bytes(&mut rng, len);
            let set = mds_encode_bytes(&data, len as u64 * 8, l, n_e).unwrap();
            let mut idx: Vec<usize> = (0..n_e).collect();
            rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
            let chosen: Vec<_> = idx[..l].iter().map(|&i| (i, set.blocks[i].clone())).collect();
            assert_eq!(mds_decode(&chosen, l, n_e, len as u64 * 8).unwrap(), data);
        }
    }

    #[test]
    fn non_byte_aligned_length() {
        let data = vec![0xAB, 0xC0];
        let set = mds_encode_bytes(&data, 10, 2, 4).unwrap();
        let rec = mds_decode(&[(3, set.blocks[3].clone()), (2, set.blocks[2].clone())], 2, 4, 10).unwrap();
        assert_eq!(rec, data);
    }

    #[test]
    fn decode_errors() {
        let set = mds_encode_bytes(&[1, 2, 3, 4], 32, 2, 4).unwrap();
        let b = |i: usize| (i, set.blocks[i].clone());
        assert!(mds_decode(&[b(0)], 2, 4, 32).is_err());
        assert!(mds_decode(&[b(1), b(1)], 2, 4, 32).is_err());
        assert!(mds_decode(&[b(0), (7, set.blocks[1].clone())], 2, 4, 32).is_err());
        assert!(mds_encode_bytes(&[0], 8, 2, 256).is_err());
        assert!(mds_encode_bytes(&[0], 8, 3, 2).is_err());
    }

    #[test]
    fn wire_roundtrip() {
        let set = mds_encode_bytes(&[5, 6, 7], 24, 2, 3).unwrap();
        let wire = set.to_wire();
        assert_eq!(&wire[..5], &[0, 0, 0, 0, 2]);
        let frames = parse_frames(&wire).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(mds_decode(&frames[1..], 2, 3, 24).unwrap(), vec![5, 6, 7]);
        assert!(parse_frames(&wire[..wire.len() - 1]).is_err());
    }
}
