use crate::dataset_io::{read_canonical, write_canonical, Dataset};
use crate::railway_model::{generate_network, load, model, nominal, GenParams};

use super::*;

fn nominal_dataset() -> Dataset {
    load(&nominal()).unwrap()
}

/// Rewrites the length and CRC fields after editing a message.
fn reframe(mut m: Vec<u8>) -> Vec<u8> {
    let len = m.len() as u32;
    m[12..16].copy_from_slice(&len.to_le_bytes());
    let crc = crc32fast::hash(&m[20..]);
    m[16..20].copy_from_slice(&crc.to_le_bytes());
    m
}

#[test]
fn empty_dataset_is_a_bare_header() {
    let ds = read_canonical("<dataset/>").unwrap();
    let m = encode(&ds).unwrap();
    assert_eq!(m.len(), 20);
    assert_eq!(&m[..4], b"DVAL");
    assert_eq!(u32::from_le_bytes(m[16..20].try_into().unwrap()), crc32fast::hash(&[]));
    assert_eq!(decode(&m).unwrap(), ds);
}

#[test]
fn header_layout() {
    let m = encode(&nominal_dataset()).unwrap();
    assert_eq!(u16::from_le_bytes([m[4], m[5]]), 1);
    assert_eq!(u32::from_le_bytes(m[12..16].try_into().unwrap()) as usize, m.len());
    let sections = model().sets.len() + model().constants.len();
    assert_eq!(u32::from_le_bytes(m[8..12].try_into().unwrap()) as usize, sections);
}

#[test]
fn fixture_round_trips() {
    let ds = nominal_dataset();
    let m = encode(&ds).unwrap();
    assert_eq!(decode(&m).unwrap(), ds);
    assert!(roundtrip_check(&m).passed());
    let xml = decode_to_xml(&m).unwrap();
    assert_eq!(read_canonical(&xml).unwrap(), ds);
    assert_eq!(write_canonical(&read_canonical(&xml).unwrap()), xml);
}

#[test]
fn generated_networks_round_trip() {
    for seed in 0..20 {
        let p = GenParams {
            blocks: 10 + seed as usize,
            switches: 3,
            flips: 2,
            signals: 6,
        };
        let ds = load(&generate_network(seed, &p).unwrap()).unwrap();
        let m = encode(&ds).unwrap();
        assert_eq!(decode(&m).unwrap(), ds, "seed {seed}");
        assert_eq!(encode(&decode(&m).unwrap()).unwrap(), m);
    }
}

#[test]
fn overflow_names_the_constant() {
    let xml = r#"<dataset><const name="k_big" kind="scalar" cols="INT"><v x="2147483648"/></const></dataset>"#;
    let err = encode(&read_canonical(xml).unwrap()).unwrap_err();
    assert_eq!(
        err,
        EncodeError::Overflow {
            constant: "k_big".into(),
            value: "2147483648".into()
        }
    );
    let xml = r#"<dataset><const name="k_low" kind="scalar" cols="INT"><v x="-2147483648"/></const></dataset>"#;
    assert!(encode(&read_canonical(xml).unwrap()).is_ok());
}

#[test]
fn distinct_decode_errors() {
    let m = encode(&nominal_dataset()).unwrap();
    let mut bad = m.clone();
    bad[0] = b'X';
    assert_eq!(decode(&bad), Err(DecodeError::BadMagic));
    let mut bad = m.clone();
    bad[4] = 9;
    assert_eq!(decode(&bad), Err(DecodeError::Version(9)));
    assert!(matches!(decode(&m[..m.len() - 1]), Err(DecodeError::Length { .. })));
    let mut bad = m.clone();
    let last = bad.len() - 1;
    bad[last] ^= 0x10;
    assert!(matches!(decode(&bad), Err(DecodeError::Crc { .. })));
    assert_eq!(decode(&m[..10]), Err(DecodeError::Truncated("header".into())));
}

#[test]
fn truncated_final_section_is_named() {
    let m = encode(&nominal_dataset()).unwrap();
    let cut = reframe(m[..m.len() - 3].to_vec());
    // Sections are sorted by name; the last one is the last carrier set.
    assert_eq!(decode(&cut), Err(DecodeError::Truncated("section `t_signal`".into())));
}

#[test]
fn non_canonical_order_decodes_but_fails_the_round_trip() {
    let xml = r#"<dataset><set name="t"><e k="a"/><e k="b"/></set>
        <const name="s" kind="subset" cols="t"><v x="a"/><v x="b"/></const></dataset>"#;
    let m = encode(&read_canonical(xml).unwrap()).unwrap();
    // Swap the two subset records, the last eight bytes of `s`.
    let s_end = m.len() - (2 + 1 + 2 + 4 + 4 + 2 + 1 + 2 + 1);
    let mut swapped = m.clone();
    swapped[s_end - 8..s_end - 4].copy_from_slice(&m[s_end - 4..s_end]);
    swapped[s_end - 4..s_end].copy_from_slice(&m[s_end - 8..s_end - 4]);
    let swapped = reframe(swapped);
    assert_eq!(decode(&swapped).unwrap(), decode(&m).unwrap());
    assert!(matches!(roundtrip_check(&swapped), RoundTrip::Mismatch { .. }));
}
