use proptest::prelude::*;

use dataval_core::codec::{decode, decode_to_xml, encode, roundtrip_check, RoundTrip};
use dataval_core::dataset_io::{read_canonical, write_canonical};
use dataval_core::railway_model::{generate_network, load, GenParams};

fn params() -> impl Strategy<Value = GenParams> {
    (2usize..25).prop_flat_map(|blocks| {
        (0..=blocks / 5, 0..=blocks / 4, 2..=blocks.max(2)).prop_map(move |(switches, flips, signals)| GenParams {
            blocks,
            switches,
            flips,
            signals,
        })
    })
}

fn encoded(seed: u64, p: &GenParams) -> Option<Vec<u8>> {
    let net = generate_network(seed, p).ok()?;
    Some(encode(&load(&net).unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_decode_encode_is_identity(seed in any::<u64>(), p in params()) {
        let Some(bytes) = encoded(seed, &p) else { return Ok(()) };
        let decoded = decode(&bytes).unwrap();
        prop_assert_eq!(encode(&decoded).unwrap(), bytes.clone());
        prop_assert_eq!(roundtrip_check(&bytes), RoundTrip::Pass);
        let xml = decode_to_xml(&bytes).unwrap();
        prop_assert_eq!(write_canonical(&read_canonical(&xml).unwrap()), xml);
    }

    #[test]
    fn altered_bytes_never_round_trip(seed in any::<u64>(), at in any::<prop::sample::Index>(), mask in 1u8..) {
        let Some(mut bytes) = encoded(seed, &GenParams::linear(6)) else { return Ok(()) };
        let k = at.index(bytes.len());
        bytes[k] ^= mask;
        prop_assert_ne!(roundtrip_check(&bytes), RoundTrip::Pass);
        prop_assert!(decode(&bytes).is_err());
    }

    #[test]
    fn decoder_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = decode(&bytes);
        prop_assert_ne!(roundtrip_check(&bytes), RoundTrip::Pass);
    }

    #[test]
    fn truncation_is_an_error(seed in any::<u64>(), cut in any::<prop::sample::Index>()) {
        let Some(bytes) = encoded(seed, &GenParams::linear(4)) else { return Ok(()) };
        let k = cut.index(bytes.len());
        prop_assert!(decode(&bytes[..k]).is_err());
    }
}
