//! Compact occupancy encoding: the ordered per-spot bits of a lot are packed
//! into one integer with spot 1 as the most significant bit, so a 16-spot lot
//! travels as a single `u64` on the wire.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest lot encodable in one integer; larger lots shard into groups.
pub const MAX_SPOTS: usize = 64;

/// Pack occupancy bits into an integer; `bits[0]` (spot 1) becomes the most
/// significant bit.
pub fn encode_status(bits: &[bool]) -> Result<u64> {
    let n = bits.len();
    if n == 0 || n > MAX_SPOTS {
        return Err(Error::Range(format!(
            "occupancy vector length {n} outside 1..={MAX_SPOTS}"
        )));
    }
    let mut mask = 0u64;
    for &b in bits {
        mask = (mask << 1) | u64::from(b);
    }
    Ok(mask)
}

/// Unpack an integer back into `n_spots` occupancy bits (inverse of
/// [`encode_status`]); leading spots missing from the integer decode to free.
pub fn decode_status(bitmask: u64, n_spots: usize) -> Result<Vec<bool>> {
    if n_spots == 0 || n_spots > MAX_SPOTS {
        return Err(Error::Range(format!(
            "spot count {n_spots} outside 1..={MAX_SPOTS}"
        )));
    }
    if n_spots < MAX_SPOTS && bitmask >> n_spots != 0 {
        return Err(Error::Range(format!(
            "bitmask {bitmask} does not fit in {n_spots} bits; check the configured spot count"
        )));
    }
    Ok((0..n_spots)
        .map(|i| bitmask >> (n_spots - 1 - i) & 1 == 1)
        .collect())
}

/// Occupied/free split of one status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancySummary {
    pub occupied_count: usize,
    pub free_count: usize,
}

/// One timestamped snapshot of the whole lot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkingStatus {
    n_spots: usize,
    bits: Vec<bool>,
    bitmask: u64,
    timestamp: DateTime<Utc>,
}

impl ParkingStatus {
    pub fn from_bits(bits: Vec<bool>, timestamp: DateTime<Utc>) -> Result<Self> {
        let bitmask = encode_status(&bits)?;
        Ok(Self {
            n_spots: bits.len(),
            bits,
            bitmask,
            timestamp,
        })
    }

    pub fn from_bitmask(bitmask: u64, n_spots: usize, timestamp: DateTime<Utc>) -> Result<Self> {
        let bits = decode_status(bitmask, n_spots)?;
        Ok(Self {
            n_spots,
            bits,
            bitmask,
            timestamp,
        })
    }

    pub fn n_spots(&self) -> usize {
        self.n_spots
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Occupancy of a 1-based spot id.
    pub fn is_occupied(&self, spot_id: u32) -> Result<bool> {
        if spot_id == 0 || spot_id as usize > self.n_spots {
            return Err(Error::Domain(format!(
                "spot {spot_id} outside 1..={}",
                self.n_spots
            )));
        }
        Ok(self.bits[spot_id as usize - 1])
    }

    pub fn bitmask(&self) -> u64 {
        self.bitmask
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }

    /// Render as the wire-style bit string, spot 1 first.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Occupied/free counts of a status (popcount of the bitmask).
pub fn summarize(status: &ParkingStatus) -> OccupancySummary {
    let occupied_count = status.bitmask.count_ones() as usize;
    OccupancySummary {
        occupied_count,
        free_count: status.n_spots - occupied_count,
    }
}

/// Parse a bit string like `1000011001100110` into occupancy bits.
pub fn parse_bit_string(s: &str) -> Result<Vec<bool>> {
    let mut bits = Vec::with_capacity(s.len());
    for (i, c) in s.chars().enumerate() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            other => {
                return Err(Error::Parse {
                    line: 1,
                    column: i + 1,
                    message: format!("bit string may contain only 0 and 1, found `{other}`"),
                })
            }
        }
    }
    if bits.is_empty() {
        return Err(Error::Range("bit string is empty".into()));
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn bits(s: &str) -> Vec<bool> {
        parse_bit_string(s).unwrap()
    }

    #[test]
    fn reference_sixteen_spot_example() {
        let v = bits("1000011001100110");
        assert_eq!(encode_status(&v).unwrap(), 34406);
        assert_eq!(decode_status(34406, 16).unwrap(), v);

        let ts = Utc.with_ymd_and_hms(2025, 10, 22, 12, 0, 0).unwrap();
        let status = ParkingStatus::from_bitmask(34406, 16, ts).unwrap();
        let s = summarize(&status);
        assert_eq!(s.occupied_count, 7);
        assert_eq!(s.free_count, 9);
        assert_eq!(status.bit_string(), "1000011001100110");
    }

    #[test]
    fn zero_and_saturated_cases() {
        assert_eq!(encode_status(&[false; 16]).unwrap(), 0);
        assert_eq!(decode_status(0, 16).unwrap(), vec![false; 16]);

        let ts = Utc::now();
        let zero = ParkingStatus::from_bitmask(0, 16, ts).unwrap();
        assert_eq!(summarize(&zero).occupied_count, 0);
        assert_eq!(summarize(&zero).free_count, 16);

        let full = ParkingStatus::from_bitmask((1 << 16) - 1, 16, ts).unwrap();
        assert_eq!(summarize(&full).occupied_count, 16);
        assert_eq!(summarize(&full).free_count, 0);
    }

    #[test]
    fn small_vector_binary_expansion() {
        assert_eq!(encode_status(&bits("1010")).unwrap(), 10);
    }

    #[test]
    fn length_limits_enforced() {
        assert!(encode_status(&[]).is_err());
        assert!(encode_status(&[true; 65]).is_err());
        assert!(decode_status(0, 0).is_err());
        assert!(decode_status(0, 65).is_err());
    }

    #[test]
    fn oversized_bitmask_signals_misconfiguration() {
        assert!(decode_status(1 << 16, 16).is_err());
        assert!(decode_status((1 << 16) - 1, 16).is_ok());
        // 64-bit lots accept any integer
        assert!(decode_status(u64::MAX, 64).is_ok());
    }

    #[test]
    fn occupied_lookup_is_one_based() {
        let ts = Utc::now();
        let status = ParkingStatus::from_bitmask(0b100, 3, ts).unwrap();
        assert!(status.is_occupied(1).unwrap());
        assert!(!status.is_occupied(3).unwrap());
        assert!(status.is_occupied(0).is_err());
        assert!(status.is_occupied(4).is_err());
    }

    #[test]
    fn random_round_trips_across_all_widths() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=64usize);
            let v: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let mask = encode_status(&v).unwrap();
            assert_eq!(decode_status(mask, n).unwrap(), v);
            if n < 64 {
                assert!(mask < 1 << n);
            }
        }
    }

    #[test]
    fn summary_counts_always_total_n() {
        use rand::{Rng, SeedableRng};
        let ts = Utc::now();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let n = rng.gen_range(1..=64usize);
            let v: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let status = ParkingStatus::from_bits(v, ts).unwrap();
            let s = summarize(&status);
            assert_eq!(s.occupied_count + s.free_count, n);
        }
    }

    #[test]
    fn bit_string_parser_rejects_garbage() {
        assert!(parse_bit_string("10a1").is_err());
        assert!(parse_bit_string("").is_err());
    }
}
