//! Problem-file parsing, validation, and digest stability.

use sosdual_core::dual::RobustMode;
use sosdual_core::probfile::{LoadedProblem, ProblemFile, ProblemKind};

const MINIMAX_EXAMPLE: &str = r#"{
  "kind": "minimax",
  "dimension": 1,
  "objectives": [
    [{"c": 2.0, "p": [4]}, {"c": -1.0, "p": [1]}],
    [{"c": 5.0, "p": [2]}, {"c": 1.0, "p": [1]}]
  ],
  "constraints": [
    [{"c": -1.0, "p": [1]}, {"c": -2.0, "p": [0]}]
  ]
}"#;

#[test]
fn minimax_round_trip() {
    let file = ProblemFile::parse(MINIMAX_EXAMPLE).unwrap();
    let loaded = file.to_problem().unwrap();
    let LoadedProblem::Minimax(p) = &loaded else {
        panic!("expected a minimax problem");
    };
    assert_eq!(p.dim, 1);
    assert_eq!(p.objectives.len(), 2);
    assert_eq!(p.constraints.len(), 1);
    assert_eq!(p.objectives[0].eval(&[1.0]).unwrap(), 1.0);

    let back = ProblemFile::from_minimax(p, None);
    let reparsed = ProblemFile::parse(&serde_json::to_string(&back).unwrap()).unwrap();
    assert_eq!(back, reparsed.canonicalize().unwrap());
}

#[test]
fn digest_ignores_formatting_and_term_order() {
    let a = ProblemFile::parse(MINIMAX_EXAMPLE).unwrap();
    // Same problem: shuffled term order, split coefficients, extra zeros.
    let b = ProblemFile::parse(
        r#"{
          "kind": "minimax",
          "dimension": 1,
          "objectives": [
            [{"c": -1.0, "p": [1]}, {"c": 1.0, "p": [4]}, {"c": 1.0, "p": [4]},
             {"c": 7.0, "p": [3]}, {"c": -7.0, "p": [3]}],
            [{"c": 1.0, "p": [1]}, {"c": 5.0, "p": [2]}]
          ],
          "constraints": [[{"c": -2.0, "p": [0]}, {"c": -1.0, "p": [1]}]]
        }"#,
    )
    .unwrap();
    assert_eq!(a.digest().unwrap(), b.digest().unwrap());

    // A genuinely different problem digests differently.
    let c = ProblemFile::parse(
        r#"{
          "kind": "minimax",
          "dimension": 1,
          "objectives": [[{"c": 2.0, "p": [4]}]],
          "constraints": []
        }"#,
    )
    .unwrap();
    assert_ne!(a.digest().unwrap(), c.digest().unwrap());
}

#[test]
fn rational_needs_denominator() {
    let missing = r#"{
      "kind": "rational",
      "dimension": 1,
      "objectives": [[{"c": 1.0, "p": [0]}]]
    }"#;
    let err = ProblemFile::parse(missing).unwrap_err();
    assert!(err.to_string().contains("denominator"), "{err}");

    let ok = r#"{
      "kind": "rational",
      "dimension": 1,
      "objectives": [[{"c": 1.0, "p": [0]}]],
      "constraints": [[{"c": -1.0, "p": [1]}, {"c": 1.0, "p": [0]}]],
      "denominator": [{"c": 1.0, "p": [1]}]
    }"#;
    let file = ProblemFile::parse(ok).unwrap();
    assert!(matches!(
        file.to_problem().unwrap(),
        LoadedProblem::Rational(_)
    ));
}

#[test]
fn robust_round_trip() {
    let text = r#"{
      "kind": "robust",
      "dimension": 2,
      "mode": "polytopeVertices",
      "objectiveScenarios": [
        [{"c": 1.0, "p": [2, 0]}],
        [{"c": 1.0, "p": [0, 2]}]
      ],
      "constraintScenarios": [
        [[{"c": 1.0, "p": [1, 0]}, {"c": -1.0, "p": [0, 0]}],
         [{"c": 1.0, "p": [0, 1]}, {"c": -1.0, "p": [0, 0]}]]
      ]
    }"#;
    let file = ProblemFile::parse(text).unwrap();
    assert_eq!(file.kind, ProblemKind::Robust);
    let LoadedProblem::Robust(p) = file.to_problem().unwrap() else {
        panic!("expected robust");
    };
    assert_eq!(p.mode, RobustMode::PolytopeVertices);
    let counterpart = p.counterpart().unwrap();
    assert_eq!(counterpart.objectives.len(), 2);
    assert_eq!(counterpart.constraints.len(), 2);
}

#[test]
fn kind_field_mismatches_rejected() {
    // A denominator on a minimax problem is an error, not ignored.
    let bad = r#"{
      "kind": "minimax",
      "dimension": 1,
      "objectives": [[{"c": 1.0, "p": [2]}]],
      "denominator": [{"c": 1.0, "p": [0]}]
    }"#;
    let err = ProblemFile::parse(bad).unwrap_err();
    assert!(err.to_string().contains("denominator"), "{err}");

    // Unknown fields are rejected outright.
    let unknown = r#"{
      "kind": "minimax",
      "dimension": 1,
      "objectives": [[{"c": 1.0, "p": [2]}]],
      "extra": 3
    }"#;
    assert!(ProblemFile::parse(unknown).is_err());

    // Robust problems require a mode.
    let no_mode = r#"{
      "kind": "robust",
      "dimension": 1,
      "objectiveScenarios": [[{"c": 1.0, "p": [2]}]]
    }"#;
    let err = ProblemFile::parse(no_mode).unwrap_err();
    assert!(err.to_string().contains("mode"), "{err}");
}

#[test]
fn structural_errors_rejected() {
    // Exponent vector length must match the dimension.
    let bad_dim = r#"{
      "kind": "minimax",
      "dimension": 2,
      "objectives": [[{"c": 1.0, "p": [2]}]]
    }"#;
    assert!(ProblemFile::parse(bad_dim).is_err());

    // Box bounds must be finite with lo < hi and match the dimension.
    let bad_box = r#"{
      "kind": "minimax",
      "dimension": 1,
      "objectives": [[{"c": 1.0, "p": [2]}]],
      "box": [[3.0, -3.0]]
    }"#;
    assert!(ProblemFile::parse(bad_box).is_err());

    let wrong_len_box = r#"{
      "kind": "minimax",
      "dimension": 2,
      "objectives": [[{"c": 1.0, "p": [2, 0]}]],
      "box": [[-1.0, 1.0]]
    }"#;
    assert!(ProblemFile::parse(wrong_len_box).is_err());

    // No objectives at all.
    let no_obj = r#"{
      "kind": "minimax",
      "dimension": 1,
      "objectives": []
    }"#;
    assert!(ProblemFile::parse(no_obj).is_err());
}

#[test]
fn box_bounds_survive_round_trip() {
    let text = r#"{
      "kind": "minimax",
      "dimension": 1,
      "objectives": [[{"c": 1.0, "p": [2]}]],
      "box": [[-2.5, 4.0]]
    }"#;
    let file = ProblemFile::parse(text).unwrap();
    assert_eq!(file.box_bounds, Some(vec![(-2.5, 4.0)]));
    let canon = file.canonicalize().unwrap();
    assert_eq!(canon.box_bounds, Some(vec![(-2.5, 4.0)]));
    // The box participates in the digest: same polynomials, different box.
    let other = ProblemFile::parse(
        r#"{
          "kind": "minimax",
          "dimension": 1,
          "objectives": [[{"c": 1.0, "p": [2]}]],
          "box": [[-2.5, 5.0]]
        }"#,
    )
    .unwrap();
    assert_ne!(file.digest().unwrap(), other.digest().unwrap());
}
