//! Centralized coded caching with an MDS block layer.
//!
//! Users, files and MDS block indices are 0-based. A subset of users is a
//! sorted `Vec<usize>`; subsets are always enumerated in lexicographic
//! order, which fixes the segment order inside a file and the block order of
//! the multicast codeword.

pub mod gf256;
pub mod mds;

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
pub use mds::{mds_decode, mds_encode, mds_encode_bytes, parse_frames, FieldSpec, MdsBlockSet};

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Library {
    files: Vec<Vec<u8>>,
}

impl Library {
    pub fn new(files: Vec<Vec<u8>>) -> Result<Self> {
        let Some(first) = files.first() else {
            return invalid("library needs at least one file");
        };
        if first.is_empty() {
            return invalid("library files must be non-empty");
        }
        if let Some((i, f)) = files.iter().enumerate().find(|(_, f)| f.len() != first.len()) {
            return invalid(format!(
                "file {i} has {} bytes, expected {} like file 0",
                f.len(),
                first.len()
            ));
        }
        Ok(Self { files })
    }

    pub fn random<R: Rng + ?Sized>(n_files: usize, file_bytes: usize, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..n_files)
                .map(|_| (0..file_bytes).map(|_| rng.random()).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn file(&self, i: usize) -> &[u8] {
        &self.files[i]
    }

    pub fn file_bytes(&self) -> usize {
        self.files[0].len()
    }

    pub fn file_bits(&self) -> u64 {
        self.file_bytes() as u64 * 8
    }
}

/// Key of one cached segment: (file index, user subset `T`).
pub type SegmentKey = (usize, Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheAssignment {
    pub users: usize,
    pub files: usize,
    pub t: usize,
    pub segment_bytes: usize,
    pub segments: BTreeMap<SegmentKey, Vec<u8>>,
    pub per_user: Vec<Vec<SegmentKey>>,
}

impl CacheAssignment {
    /// Bits stored by user `k`.
    pub fn cached_bits(&self, k: usize) -> u64 {
        self.per_user[k].len() as u64 * self.segment_bytes as u64 * 8
    }

    /// Materialized cache contents of user `k`.
    pub fn user_cache(&self, k: usize) -> UserCache {
        UserCache {
            user: k,
            entries: self.per_user[k]
                .iter()
                .map(|key| (key.clone(), self.segments[key].clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCache {
    pub user: usize,
    pub entries: BTreeMap<SegmentKey, Vec<u8>>,
}

/// Cache parameter `t = MK/N`, rejected unless it is an integer in `1..=K`.
pub fn cache_parameter(k: usize, n: usize, m: Ratio<u64>) -> Result<usize> {
    if k == 0 || n == 0 {
        return invalid("K and N must be positive");
    }
    let t = m * Ratio::from_integer(k as u64) / Ratio::from_integer(n as u64);
    if !t.is_integer() {
        return invalid(format!(
            "t = MK/N = {t} is not an integer; memory sharing between integer points is not supported"
        ));
    }
    let t = t.to_integer() as usize;
    if t == 0 || t > k {
        return invalid(format!("t = MK/N = {t} must lie in 1..=K (K={k})"));
    }
    Ok(t)
}

/// Centralized placement: file `i` is split into `C(K,t)` segments `W_i^T` and
/// user `k` stores every segment with `k ∈ T`.
pub fn place_caches(k: usize, n: usize, m: Ratio<u64>, library: &Library) -> Result<CacheAssignment> {
    if library.len() != n {
        return invalid(format!("library has {} files, N={n}", library.len()));
    }
    let t = cache_parameter(k, n, m)?;
    let parts = binomial_u64(k as u64, t as u64) as usize;
    let fb = library.file_bytes();
    if fb % parts != 0 {
        return invalid(format!(
            "file size F={} bits is not divisible into C({k},{t})={parts} whole-byte segments",
            fb * 8
        ));
    }
    let seg = fb / parts;
    let ts = subsets(k, t);
    let mut segments = BTreeMap::new();
    let mut per_user = vec![Vec::new(); k];
    for file in 0..n {
        for (j, subset) in ts.iter().enumerate() {
            let key = (file, subset.clone());
            segments.insert(key.clone(), library.file(file)[j * seg..(j + 1) * seg].to_vec());
            for &u in subset {
                per_user[u].push(key.clone());
            }
        }
    }
    Ok(CacheAssignment {
        users: k,
        files: n,
        t,
        segment_bytes: seg,
        segments,
        per_user,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MulticastCodeword {
    pub users: usize,
    pub t: usize,
    /// `(S, X_S)` in lexicographic order of `S`.
    pub blocks: Vec<(Vec<usize>, Vec<u8>)>,
    pub total_bits: u64,
}

impl MulticastCodeword {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.blocks.iter().flat_map(|(_, b)| b.iter().copied()).collect()
    }

    /// Re-splits a decoded byte string into blocks for the given `(K, t)`.
    pub fn from_bytes(users: usize, t: usize, bytes: &[u8]) -> Result<Self> {
        let sets = subsets(users, t + 1);
        if sets.is_empty() {
            if !bytes.is_empty() {
                return Err(Error::Integrity("empty codeword expected".into()));
            }
            return Ok(Self { users, t, blocks: Vec::new(), total_bits: 0 });
        }
        if bytes.len() % sets.len() != 0 {
            return Err(Error::Integrity(format!(
                "{} bytes do not split into {} equal blocks",
                bytes.len(),
                sets.len()
            )));
        }
        let bb = bytes.len() / sets.len();
        Ok(Self {
            users,
            t,
            blocks: sets
                .into_iter()
                .zip(bytes.chunks(bb.max(1)))
                .map(|(s, c)| (s, c.to_vec()))
                .collect(),
            total_bits: bytes.len() as u64 * 8,
        })
    }
}

fn xor_into(dst: &mut [u8], src: &[u8]) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s);
}

/// `X_S = ⊕_{k ∈ S} W_{d_k}^{S \ {k}}` for every `(t+1)`-subset `S`.
pub fn build_multicast_codeword(
    demand: &[usize],
    assignment: &CacheAssignment,
    library: &Library,
) -> Result<MulticastCodeword> {
    if demand.len() != assignment.users {
        return invalid(format!(
            "demand has {} entries, K={}",
            demand.len(),
            assignment.users
        ));
    }
    if let Some(&d) = demand.iter().find(|&&d| d >= library.len()) {
        return invalid(format!("demanded file {d} not in library of {}", library.len()));
    }
    let mut blocks = Vec::new();
    for s in subsets(assignment.users, assignment.t + 1) {
        let mut x = vec![0u8; assignment.segment_bytes];
        for &k in &s {
            let rest: Vec<usize> = s.iter().copied().filter(|&u| u != k).collect();
            xor_into(&mut x, &assignment.segments[&(demand[k], rest)]);
        }
        blocks.push((s, x));
    }
    let total_bits = blocks.len() as u64 * assignment.segment_bytes as u64 * 8;
    Ok(MulticastCodeword {
        users: assignment.users,
        t: assignment.t,
        blocks,
        total_bits,
    })
}

/// `F·K(1-μ)/(1+Kμ)` in bits, rejected unless integral.
pub fn codeword_length_bits(k: u64, mu: Ratio<u64>, f: u64) -> Result<u64> {
    if mu <= Ratio::from_integer(0) || mu > Ratio::from_integer(1) {
        return invalid(format!("mu must lie in (0, 1], got {mu}"));
    }
    let kr = Ratio::from_integer(k);
    let one = Ratio::from_integer(1u64);
    let len = Ratio::from_integer(f) * kr * (one - mu) / (one + kr * mu);
    if !len.is_integer() {
        return invalid(format!("transmission length {len} bits is not integral"));
    }
    Ok(len.to_integer())
}

pub fn recover_file(
    k: usize,
    codeword: &MulticastCodeword,
    assignment: &CacheAssignment,
    demand: &[usize],
) -> Result<Vec<u8>> {
    if k >= assignment.users {
        return invalid(format!("user {k} out of range 0..{}", assignment.users));
    }
    recover_from_cache(&assignment.user_cache(k), codeword, assignment.t, assignment.segment_bytes, demand)
}

/// Reassembles `W_{d_k}` from user `k`'s cache and the multicast codeword.
pub fn recover_from_cache(
    cache: &UserCache,
    codeword: &MulticastCodeword,
    t: usize,
    segment_bytes: usize,
    demand: &[usize],
) -> Result<Vec<u8>> {
    let k = cache.user;
    let users = codeword.users;
    if demand.len() != users {
        return invalid(format!("demand has {} entries, K={users}", demand.len()));
    }
    let lookup = |key: &SegmentKey| -> Result<&Vec<u8>> {
        cache.entries.get(key).ok_or_else(|| {
            Error::Integrity(format!(
                "user {k} is missing cached segment W_{}^{:?}",
                key.0, key.1
            ))
        })
    };
    let blocks: BTreeMap<&Vec<usize>, &Vec<u8>> = codeword.blocks.iter().map(|(s, b)| (s, b)).collect();
    let want = demand[k];
    let mut file = Vec::with_capacity(segment_bytes * binomial_u64(users as u64, t as u64) as usize);
    for tset in subsets(users, t) {
        if tset.contains(&k) {
            file.extend_from_slice(lookup(&(want, tset))?);
            continue;
        }
        let mut s = tset.clone();
        s.push(k);
        s.sort_unstable();
        let x = blocks
            .get(&s)
            .ok_or_else(|| Error::Integrity(format!("codeword lacks block X_{s:?}")))?;
        let mut seg = x.to_vec();
        for &j in s.iter().filter(|&&j| j != k) {
            let rest: Vec<usize> = s.iter().copied().filter(|&u| u != j).collect();
            xor_into(&mut seg, lookup(&(demand[j], rest))?);
        }
        file.extend_from_slice(&seg);
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: u64, d: u64) -> Ratio<u64> {
        Ratio::new(n, d)
    }

    fn lib(n: usize, bytes: usize, seed: u64) -> Library {
        Library::random(n, bytes, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn all_demands(k: usize, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|d| (0..n).map(move |f| [d.clone(), vec![f]].concat()))
                .collect();
        }
        out
    }

    #[test]
    fn lexicographic_subsets() {
        assert_eq!(subsets(4, 2), vec![
            vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]
        ]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn two_users_two_files() {
        let library = lib(2, 8, 1);
        let a = place_caches(2, 2, r(1, 1), &library).unwrap();
        assert_eq!(a.t, 1);
        assert_eq!(a.per_user[0], vec![(0, vec![0]), (1, vec![0])]);
        assert_eq!(a.per_user[1], vec![(0, vec![1]), (1, vec![1])]);
        assert_eq!(a.cached_bits(0), library.file_bits());
        let cw = build_multicast_codeword(&[0, 1], &a, &library).unwrap();
        assert_eq!(cw.blocks.len(), 1);
        let mut x = a.segments[&(0, vec![1])].clone();
        xor_into(&mut x, &a.segments[&(1, vec![0])]);
        assert_eq!(cw.blocks[0], (vec![0, 1], x));
        assert_eq!(cw.total_bits, library.file_bits() / 2);
        assert_eq!(recover_file(0, &cw, &a, &[0, 1]).unwrap(), library.file(0));
        assert_eq!(recover_file(1, &cw, &a, &[0, 1]).unwrap(), library.file(1));
    }

    #[test]
    fn three_users_t1() {
        let library = lib(3, 9, 2);
        let a = place_caches(3, 3, r(1, 1), &library).unwrap();
        for k in 0..3 {
            assert_eq!(a.per_user[k].len(), 3);
            assert_eq!(a.cached_bits(k), library.file_bits());
        }
        let cw = build_multicast_codeword(&[0, 1, 2], &a, &library).unwrap();
        let sets: Vec<_> = cw.blocks.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(cw.total_bits, library.file_bits());
        assert_eq!(cw.total_bits, codeword_length_bits(3, r(1, 3), library.file_bits()).unwrap());
    }

    #[test]
    fn four_users_t2_cache_size_and_all_demands() {
        let library = lib(2, 12, 3);
        let a = place_caches(4, 2, r(1, 1), &library).unwrap();
        assert_eq!(a.t, 2);
        // enumerate memberships directly
        for k in 0..4 {
            let bits: u64 = a
                .segments
                .keys()
                .filter(|(_, s)| s.contains(&k))
                .map(|_| a.segment_bytes as u64 * 8)
                .sum();
            assert_eq!(bits, library.file_bits());
        }
        for d in all_demands(4, 2) {
            let cw = build_multicast_codeword(&d, &a, &library).unwrap();
            for k in 0..4 {
                assert_eq!(recover_file(k, &cw, &a, &d).unwrap(), library.file(d[k]));
            }
        }
    }

    #[test]
    fn same_demand_everywhere() {
        let library = lib(3, 6, 4);
        let a = place_caches(3, 3, r(1, 1), &library).unwrap();
        let d = [0, 0, 0];
        let cw = build_multicast_codeword(&d, &a, &library).unwrap();
        for k in 0..3 {
            assert_eq!(recover_file(k, &cw, &a, &d).unwrap(), library.file(0));
        }
    }

    #[test]
    fn transmission_length_examples() {
        assert_eq!(codeword_length_bits(2, r(1, 2), 1024).unwrap(), 512);
        assert_eq!(codeword_length_bits(3, r(1, 3), 300).unwrap(), 300);
        let f = 45 * 8;
        let expected = codeword_length_bits(10, r(1, 5), f).unwrap();
        let library = lib(5, 45, 5);
        let a = place_caches(10, 5, r(1, 1), &library).unwrap();
        let cw = build_multicast_codeword(&[0, 1, 2, 3, 4, 0, 1, 2, 3, 4], &a, &library).unwrap();
        let summed: u64 = cw.blocks.iter().map(|(_, b)| b.len() as u64 * 8).sum();
        assert_eq!(summed, expected);
        assert_eq!(expected, f * 10 * 4 / 5 / 3);
        assert!(codeword_length_bits(2, r(1, 2), 7).is_err());
    }

    #[test]
    fn rejected_parameters() {
        let library = lib(3, 9, 6);
        let e = place_caches(2, 3, r(1, 1), &library).unwrap_err();
        assert!(e.to_string().contains("not an integer"));
        assert!(place_caches(4, 3, r(3, 2), &lib(3, 7, 6)).is_err());
        assert!(Library::new(vec![vec![1, 2], vec![3]]).is_err());
        let a = place_caches(3, 3, r(1, 1), &library).unwrap();
        assert!(build_multicast_codeword(&[0, 1], &a, &library).is_err());
    }

    #[test]
    fn missing_segment_is_integrity_error() {
        let library = lib(3, 9, 7);
        let a = place_caches(3, 3, r(1, 1), &library).unwrap();
        let d = [0, 1, 2];
        let cw = build_multicast_codeword(&d, &a, &library).unwrap();
        let mut cache = a.user_cache(0);
        let key = cache.entries.keys().next().unwrap().clone();
        cache.entries.remove(&key);
        let err = recover_from_cache(&cache, &cw, 1, a.segment_bytes, &d).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn full_memory_needs_no_transmission() {
        let library = lib(2, 4, 8);
        let a = place_caches(3, 2, r(2, 1), &library).unwrap();
        assert_eq!(a.t, 3);
        let cw = build_multicast_codeword(&[1, 0, 1], &a, &library).unwrap();
        assert!(cw.blocks.is_empty());
        assert_eq!(recover_file(2, &cw, &a, &[1, 0, 1]).unwrap(), library.file(1));
    }

    #[test]
    fn codeword_bytes_roundtrip_through_mds() {
        let library = lib(3, 20, 9);
        let a = place_caches(5, 3, r(3, 5), &library).unwrap();
        let d = [2, 0, 1, 1, 2];
        let cw = build_multicast_codeword(&d, &a, &library).unwrap();
        let set = mds_encode(&cw, 3, 6).unwrap();
        let chosen: Vec<_> = [5, 1, 3].iter().map(|&i| (i, set.blocks[i].clone())).collect();
        let bytes = mds_decode(&chosen, 3, 6, cw.total_bits).unwrap();
        let back = MulticastCodeword::from_bytes(5, a.t, &bytes).unwrap();
        assert_eq!(back, cw);
        for k in 0..5 {
            assert_eq!(recover_file(k, &back, &a, &d).unwrap(), library.file(d[k]));
        }
    }
}
