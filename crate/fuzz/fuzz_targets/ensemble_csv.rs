#![no_main]

use libfuzzer_sys::fuzz_target;
use tlsgap::ensemble::TlsEnsemble;

fuzz_target!(|data: &[u8]| {
    if let Ok(ens) = TlsEnsemble::read_csv(data) {
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).expect("parsed ensemble writes");
        let back = TlsEnsemble::read_csv(buf.as_slice()).expect("written ensemble parses");
        assert_eq!(back.members, ens.members);
    }
});
