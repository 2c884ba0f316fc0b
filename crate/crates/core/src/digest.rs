use alloc::string::String;
use sha2::{Digest, Sha256};

pub type Digest256 = [u8; 32];

pub fn sha256(data: &[u8]) -> Digest256 {
    Sha256::digest(data).into()
}

/// Lower-case hex encoding.
pub fn to_hex(bytes: &[u8]) -> String {
    const HEX: &[u8; 16] = b"0123456789abcdef";
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push(HEX[(b >> 4) as usize] as char);
        s.push(HEX[(b & 15) as usize] as char);
    }
    s
}

pub fn sha256_hex(data: &[u8]) -> String {
    to_hex(&sha256(data))
}
