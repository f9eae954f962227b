//! The production scorer against the brute-force reference, exactly, on
//! random pairs and on hand-picked shapes.

mod support;

use disgeo::gadm::wratio;
use rand::distributions::{Distribution, Uniform};
use rand::rngs::StdRng;
use rand::SeedableRng;
use support::wratio_reference;

fn random_string(rng: &mut StdRng, len: usize) -> String {
    // lowercase letters plus spaces, the post-normalization alphabet
    let chars = Uniform::new_inclusive(0u8, 26);
    (0..len)
        .map(|_| {
            let c = chars.sample(rng);
            if c == 26 {
                ' '
            } else {
                (b'a' + c) as char
            }
        })
        .collect()
}

#[test]
fn matches_reference_on_10k_random_pairs() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let lengths = Uniform::new_inclusive(1usize, 40);
    let start = std::time::Instant::now();
    for i in 0..10_000 {
        let len_a = lengths.sample(&mut rng);
        let len_b = lengths.sample(&mut rng);
        let a = random_string(&mut rng, len_a);
        let b = random_string(&mut rng, len_b);
        let production = wratio(&a, &b);
        let reference = wratio_reference(&a, &b);
        assert_eq!(
            production, reference,
            "pair {i}: {a:?} vs {b:?}: production {production} != reference {reference}"
        );
    }
    assert!(
        start.elapsed() < std::time::Duration::from_secs(10),
        "equivalence sweep too slow: {:?}",
        start.elapsed()
    );
}

#[test]
fn matches_reference_on_adversarial_shapes() {
    let cases = [
        ("new york", "newyork"),
        ("a", "a"),
        ("a", "b"),
        ("ab", "ba"),
        ("lahore", "lahore metropolitan corporation"),
        ("x", "a much much longer string than the first"),
        ("one two three", "three two one"),
        ("aaa aaa aaa", "aaa"),
        ("district of columbia", "columbia"),
        ("s  p  a  c  e  s", "spaces"),
        ("ab", "abababababababababababababababab"),
    ];
    for (a, b) in cases {
        assert_eq!(wratio(a, b), wratio_reference(a, b), "{a:?} vs {b:?}");
        assert_eq!(wratio(b, a), wratio_reference(b, a), "{b:?} vs {a:?}");
    }
}

#[test]
fn spacing_example_value() {
    // indel("new york", "newyork") = 1 over 15 characters total
    let expected = 100.0 * (1.0 - 1.0 / 15.0);
    assert_eq!(wratio("new york", "newyork"), expected);
    assert_eq!(wratio_reference("new york", "newyork"), expected);
}

#[test]
fn indel_routes_agree() {
    let mut rng = StdRng::seed_from_u64(99);
    let lengths = Uniform::new_inclusive(0usize, 30);
    for _ in 0..2_000 {
        let len_a = lengths.sample(&mut rng);
        let len_b = lengths.sample(&mut rng);
        let a = random_string(&mut rng, len_a);
        let b = random_string(&mut rng, len_b);
        let ca: Vec<char> = a.chars().collect();
        let cb: Vec<char> = b.chars().collect();
        assert_eq!(
            wratio::indel_distance(&a, &b),
            support::indel_reference(&ca, &cb),
            "{a:?} vs {b:?}"
        );
    }
}
