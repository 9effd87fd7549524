//! Port numbers as fixed-width big-endian bit strings.

use super::{ceil_log2, KMode, Mutation, ProtocolConfig};

pub(super) fn bit_length(cfg: &ProtocolConfig, own_degree: usize) -> usize {
    if cfg.mutated(Mutation::WrongK) {
        return (ceil_log2(cfg.n) as usize).saturating_sub(1).max(1);
    }
    match cfg.k_mode {
        KMode::Uniform => ceil_log2(cfg.n) as usize + 1,
        KMode::Strict => ceil_log2(own_degree) as usize + 1,
    }
}

pub fn encode_port_bits(port: usize, k: usize) -> Result<Vec<bool>, String> {
    if k < usize::BITS as usize && port >> k != 0 {
        return Err(format!("port {port} does not fit in {k} bits"));
    }
    Ok((0..k).rev().map(|b| port >> b & 1 == 1).collect())
}

/// Reads bits back from whether the sender was away from its node in each of
/// the `2k` exchange rounds: away then back is 1, home twice is 0.
pub fn decode_port_bits(away: &[bool]) -> Result<Vec<bool>, String> {
    if !away.len().is_multiple_of(2) {
        return Err(format!("odd number of exchange rounds ({})", away.len()));
    }
    away.chunks(2)
        .enumerate()
        .map(|(i, pair)| match pair {
            [true, false] => Ok(true),
            [false, false] => Ok(false),
            _ => Err(format!("bit {i}: sender did not return home")),
        })
        .collect()
}

pub fn bits_to_port(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(format_bits(&encode_port_bits(3, 3).unwrap()), "011");
        assert_eq!(format_bits(&encode_port_bits(0, 3).unwrap()), "000");
        assert!(encode_port_bits(8, 3).is_err());
        let cfg = ProtocolConfig { k_mode: KMode::Strict, ..ProtocolConfig::new(8, vec![0]) };
        assert_eq!(bit_length(&cfg, 4), 3);
        let cfg = ProtocolConfig::new(4, vec![0]);
        assert_eq!(bit_length(&cfg, 1), 3);
    }

    #[test]
    fn round_trip() {
        for d in 1..=8usize {
            let k = ceil_log2(d) as usize + 1;
            for p in 0..d {
                let bits = encode_port_bits(p, k).unwrap();
                let away: Vec<bool> = bits.iter().flat_map(|&b| [b, false]).collect();
                let decoded = decode_port_bits(&away).unwrap();
                assert_eq!(bits_to_port(&decoded), p);
            }
        }
        assert!(decode_port_bits(&[true, true]).is_err());
        assert!(decode_port_bits(&[false, true]).is_err());
    }
}
