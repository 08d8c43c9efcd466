//! BIP-340 reference vectors run through the receipt signing wrappers.

use hex_literal::hex;
use pott_core::signing::{is_valid_node_id, sign_receipt, verify_signature, NodeId, RelayKeypair};

// (index, secret, public, aux, message, signature)
const SIGN: &[(u8, [u8; 32], [u8; 32], [u8; 32], [u8; 32], [u8; 64])] = &[
    (
        0,
        hex!("0000000000000000000000000000000000000000000000000000000000000003"),
        hex!("f9308a019258c31049344f85f89d5229b531c845836f99b08601f113bce036f9"),
        hex!("0000000000000000000000000000000000000000000000000000000000000000"),
        hex!("0000000000000000000000000000000000000000000000000000000000000000"),
        hex!("e907831f80848d1069a5371b402410364bdf1c5f8307b0084c55f1ce2dca8215" "25f66a4a85ea8b71e482a74f382d2ce5ebeee8fdb2172f477df4900d310536c0"),
    ),
    (
        1,
        hex!("b7e151628aed2a6abf7158809cf4f3c762e7160f38b4da56a784d9045190cfef"),
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("0000000000000000000000000000000000000000000000000000000000000001"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("6896bd60eeae296db48a229ff71dfe071bde413e6d43f917dc8dcf8c78de3341" "8906d11ac976abccb20b091292bff4ea897efcb639ea871cfa95f6de339e4b0a"),
    ),
    (
        2,
        hex!("c90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74020bbea63b14e5c9"),
        hex!("dd308afec5777e13121fa72b9cc1b7cc0139715309b086c960e18fd969774eb8"),
        hex!("c87aa53824b4d7ae2eb035a2b5bbbccc080e76cdc6d1692c4b0b62d798e6d906"),
        hex!("7e2d58d8b3bcdf1abadec7829054f90dda9805aab56c77333024b9d0a508b75c"),
        hex!("5831aaeed7b44bb74e5eab94ba9d4294c49bcf2a60728d8b4c200f50dd313c1b" "ab745879a5ad954a72c45a91c3a51d3c7adea98d82f8481e0e1e03674a6f3fb7"),
    ),
    (
        3,
        hex!("0b432b2677937381aef05bb02a66ecd012773062cf3fa2549e44f58ed2401710"),
        hex!("25d1dff95105f5253c4022f628a996ad3a0d95fbf21d468a1b33f8c160d8f517"),
        hex!("ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"),
        hex!("ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"),
        hex!("7eb0509757e246f19449885651611cb965ecc1a187dd51b64fda1edc9637d5ec" "97582b9cb13db3933705b32ba982af5af25fd78881ebb32771fc5922efc66ea3"),
    ),
];

// (index, public, message, signature, valid)
const VERIFY: &[(u8, [u8; 32], [u8; 32], [u8; 64], bool)] = &[
    (
        4,
        hex!("d69c3509bb99e412e68b0fe8544e72837dfa30746d8be2aa65975f29d22dc7b9"),
        hex!("4df3c3f68fcc83b27e9d42c90431a72499f17875c81a599b566c9889b9696703"),
        hex!("00000000000000000000003b78ce563f89a0ed9414f5aa28ad0d96d6795f9c63" "76afb1548af603b3eb45c9f8207dee1060cb71c04e80f593060b07d28308d7f4"),
        true,
    ),
    (
        5,
        hex!("eefdea4cdb677750a420fee807eacf21eb9898ae79b9768766e4faa04a2d4a34"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("6cff5c3ba86c69ea4b7376f31a9bcb4f74c1976089b2d9963da2e5543e177769" "69e89b4c5564d00349106b8497785dd7d1d713a8ae82b32fa79d5f7fc407d39b"),
        false,
    ),
    (
        6,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("fff97bd5755eeea420453a14355235d382f6472f8568a18b2f057a1460297556" "3cc27944640ac607cd107ae10923d9ef7a73c643e166be5ebeafa34b1ac553e2"),
        false,
    ),
    (
        7,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("1fa62e331edbc21c394792d2ab1100a7b432b013df3f6ff4f99fcb33e0e1515f" "28890b3edb6e7189b630448b515ce4f8622a954cfe545735aaea5134fccdb2bd"),
        false,
    ),
    (
        8,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("6cff5c3ba86c69ea4b7376f31a9bcb4f74c1976089b2d9963da2e5543e177769" "961764b3aa9b2ffcb6ef947b6887a226e8d7c93e00c5ed0c1834ff0d0c2e6da6"),
        false,
    ),
    (
        9,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("0000000000000000000000000000000000000000000000000000000000000000" "123dda8328af9c23a94c1feecfd123ba4fb73476f0d594dcb65c6425bd186051"),
        false,
    ),
    (
        10,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("0000000000000000000000000000000000000000000000000000000000000001" "7615fbaf5ae28864013c099742deadb4dba87f11ac6754f93780d5a1837cf197"),
        false,
    ),
    (
        11,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("4a298dacae57395a15d0795ddbfd1dcb564da82b0f269bc70a74f8220429ba1d" "69e89b4c5564d00349106b8497785dd7d1d713a8ae82b32fa79d5f7fc407d39b"),
        false,
    ),
    (
        12,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f" "69e89b4c5564d00349106b8497785dd7d1d713a8ae82b32fa79d5f7fc407d39b"),
        false,
    ),
    (
        13,
        hex!("dff1d77f2a671c5f36183726db2341be58feae1da2deced843240f7b502ba659"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("6cff5c3ba86c69ea4b7376f31a9bcb4f74c1976089b2d9963da2e5543e177769" "fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141"),
        false,
    ),
    (
        14,
        hex!("fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc30"),
        hex!("243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89"),
        hex!("6cff5c3ba86c69ea4b7376f31a9bcb4f74c1976089b2d9963da2e5543e177769" "69e89b4c5564d00349106b8497785dd7d1d713a8ae82b32fa79d5f7fc407d39b"),
        false,
    ),
];

#[test]
fn sign_vectors() {
    for (index, sk, pk, aux, msg, sig) in SIGN {
        let kp = RelayKeypair::from_secret_bytes(sk).unwrap();
        assert_eq!(kp.public().0, *pk, "public key, vector {index}");
        assert_eq!(sign_receipt(msg, &kp, aux).unwrap(), *sig, "signature, vector {index}");
        assert!(verify_signature(msg, sig, &kp.public()), "verify, vector {index}");
    }
}

#[test]
fn verify_vectors() {
    for (index, pk, msg, sig, valid) in VERIFY {
        assert_eq!(verify_signature(msg, sig, &NodeId(*pk)), *valid, "vector {index}");
    }
    // 5 and 14 are invalid public keys.
    assert!(!is_valid_node_id(&NodeId(VERIFY[1].1)));
    assert!(!is_valid_node_id(&NodeId(VERIFY[10].1)));
}

/// Variable-length messages, all with the same key and zero aux.
#[test]
fn variable_length_vectors() {
    let kp = RelayKeypair::from_secret_bytes(&hex!(
        "0340034003400340034003400340034003400340034003400340034003400340"
    ))
    .unwrap();
    let cases: [(u8, Vec<u8>, [u8; 64]); 4] = [
        (
            15,
            Vec::new(),
            hex!("71535db165ecd9fbbc046e5ffaea61186bb6ad436732fccc25291a55895464cf" "6069ce26bf03466228f19a3a62db8a649f2d560fac652827d1af0574e427ab63"),
        ),
        (
            16,
            hex!("11").to_vec(),
            hex!("08a20a0afef64124649232e0693c583ab1b9934ae63b4c3511f3ae1134c6a303" "ea3173bfea6683bd101fa5aa5dbc1996fe7cacfc5a577d33ec14564cec2bacbf"),
        ),
        (
            17,
            hex!("0102030405060708090A0B0C0D0E0F1011").to_vec(),
            hex!("5130f39a4059b43bc7cac09a19ece52b5d8699d1a71e3c52da9afdb6b50ac370" "c4a482b77bf960f8681540e25b6771ece1e5a37fd80e5a51897c5566a97ea5a5"),
        ),
        (
            18,
            vec![0x99; 100],
            hex!("403b12b0d8555a344175ea7ec746566303321e5dbfa8be6f091635163eca79a8" "585ed3e3170807e7c03b720fc54c7b23897fcba0e9d0b4a06894cfd249f22367"),
        ),
    ];
    for (index, msg, sig) in cases {
        assert_eq!(sign_receipt(&msg, &kp, &[0; 32]).unwrap(), sig, "vector {index}");
        assert!(verify_signature(&msg, &sig, &kp.public()));
    }
}
