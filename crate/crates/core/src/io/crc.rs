//! CRC-32 used on the wire and in the container.
//!
//! Polynomial 0x04C11DB7, initial value 0xFFFFFFFF, no reflection and no
//! final XOR: the default configuration of the STM32 CRC peripheral, known
//! in catalogues as CRC-32/MPEG-2.

use crc::{Crc, CRC_32_MPEG_2};

const ENGINE: Crc<u32> = Crc::<u32>::new(&CRC_32_MPEG_2);

pub fn crc32(bytes: &[u8]) -> u32 {
    ENGINE.checksum(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bitwise reference, MSB first.
    fn reference(bytes: &[u8]) -> u32 {
        let mut crc = 0xFFFF_FFFFu32;
        for &b in bytes {
            crc ^= (b as u32) << 24;
            for _ in 0..8 {
                crc = if crc & 0x8000_0000 != 0 {
                    (crc << 1) ^ 0x04C1_1DB7
                } else {
                    crc << 1
                };
            }
        }
        crc
    }

    #[test]
    fn catalogue_check_value() {
        assert_eq!(crc32(b"123456789"), 0x0376_E6E7);
    }

    #[test]
    fn matches_bitwise_reference() {
        let data: Vec<u8> = (0..=255u8).cycle().take(1000).collect();
        for len in [0, 1, 3, 4, 17, 1000] {
            assert_eq!(crc32(&data[..len]), reference(&data[..len]));
        }
    }
}
