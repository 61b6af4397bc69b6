use num_bigint::BigInt;
use octahedron::network::{p_matrix, s_matrix, Chip};
use octahedron::surface::generic_data;
use octahedron::tsystem::{solve, Method, Point};
use octahedron::verify::{check_equivalence, EquivalencePlan};
use octahedron::*;
use proptest::prelude::*;

const NAMES: [&str; 3] = ["x", "y", "z"];

fn table() -> VarTable {
    let mut t = VarTable::new();
    for n in NAMES {
        t.intern(n);
    }
    t
}

type RawTerm = (i64, [i32; 3]);

fn raw_poly() -> impl Strategy<Value = Vec<RawTerm>> {
    prop::collection::vec((-4i64..=4, [-2i32..=2, -2i32..=2, -2i32..=2]), 0..5)
}

fn raw_monomial() -> impl Strategy<Value = RawTerm> {
    (prop_oneof![Just(1i64), Just(-1)], [-2i32..=2, -2i32..=2, -2i32..=2])
}

fn build(t: &VarTable, raw: &[RawTerm]) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for (c, e) in raw {
        let m = Monomial::from_pairs((0..3).map(|v| (t.lookup(NAMES[v]).unwrap(), e[v])));
        p = &p + &LaurentPoly::term(t, m, BigInt::from(*c));
    }
    p
}

proptest! {
    #[test]
    fn ring_laws(a in raw_poly(), b in raw_poly(), c in raw_poly()) {
        let t = table();
        let (a, b, c) = (build(&t, &a), build(&t, &b), build(&t, &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &LaurentPoly::one(), a.clone());
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(-(-&a), a.clone());
    }

    #[test]
    fn exact_division_undoes_multiplication(a in raw_poly(), b in raw_poly()) {
        let t = table();
        let (a, b) = (build(&t, &a), build(&t, &b));
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).div_exact(&b).unwrap(), a);
    }

    #[test]
    fn units_invert(m in raw_monomial()) {
        let t = table();
        let u = build(&t, &[m]);
        prop_assert_eq!(&u * &u.inverse().unwrap(), LaurentPoly::one());
    }

    #[test]
    fn canonical_text_round_trips(a in raw_poly()) {
        let mut t = table();
        let a = build(&t, &a);
        let text = a.canonical_text(&t);
        prop_assert_eq!(LaurentPoly::parse_canonical(&text, &mut t).unwrap(), a.clone());
        let s = a.to_structured(&t);
        prop_assert_eq!(LaurentPoly::from_structured(&s, &mut t).unwrap(), a);
    }

    #[test]
    fn chip_inverses(a in raw_monomial(), b in raw_monomial(), c in raw_monomial(), r in 1usize..5, row in 1usize..5) {
        prop_assume!(row <= r);
        let t = table();
        let (a, b, c) = (build(&t, &[a]), build(&t, &[b]), build(&t, &[c]));
        let n = r + 1;
        let u = Chip::u(row, a.clone(), b.clone(), c.clone()).matrix(n).unwrap();
        let u_inv = Chip::u(row, b.clone(), a.clone(), -&c).matrix(n).unwrap();
        prop_assert!(u.try_mul(&u_inv).unwrap().is_identity());
        let v = Chip::v(row, a.clone(), b.clone(), c.clone()).matrix(n).unwrap();
        let v_inv = Chip::v(row, -&a, c, b).matrix(n).unwrap();
        prop_assert!(v.try_mul(&v_inv).unwrap().is_identity());
    }

    #[test]
    fn sign_matrices_are_involutions(r in 1usize..7) {
        prop_assert!(p_matrix(r).try_mul(&p_matrix(r)).unwrap().is_identity());
        prop_assert!(s_matrix(r).try_mul(&s_matrix(r)).unwrap().is_identity());
    }

    #[test]
    fn forward_then_backward_mutation_is_identity(r in 1i64..4, j in -3i64..=3, i_off in 0i64..3) {
        let i = 1 + i_off % r;
        let w = Window::new(1, r, -5, 5);
        let mut table = VarTable::new();
        let data0 = generic_data(w, &mut table);
        let s0 = SteppedSurface::flat(SurfaceKind::Ar { r }, w, 0).unwrap();
        let (mut s, mut d) = (s0.clone(), data0.clone());
        match s.mutate(&mut d, i, j, Direction::Forward) {
            Ok(()) => {
                prop_assert_ne!(&s, &s0);
                s.mutate(&mut d, i, j, Direction::Backward).unwrap();
                prop_assert_eq!(&s, &s0);
                prop_assert_eq!(d, data0);
            }
            // only local minima move forward
            Err(Error::NotMutable { .. }) => prop_assert_eq!(s0.height(i, j), Some(1)),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn mutated_value_matches_the_recursion(j in -2i64..=2) {
        let w = Window::new(-4, 4, -6, 6);
        let mut table = VarTable::new();
        let data = generic_data(w, &mut table);
        let s0 = SteppedSurface::flat(SurfaceKind::Ainf, w, 0).unwrap();
        // (0,j) is a local minimum for even j
        let jj = 2 * (j / 2);
        let (mut s, mut d) = (s0.clone(), data.clone());
        s.mutate(&mut d, 0, jj, Direction::Forward).unwrap();
        let want = solve(Method::Oracle, &s0, &data, Point::new(0, jj, 2)).unwrap().value;
        prop_assert_eq!(d.get(0, jj).unwrap().clone(), want);
    }
}

#[test]
fn equivalence_reports_are_deterministic() {
    let plan = EquivalencePlan {
        flat: 4,
        mutated: 4,
        truncated: 1,
        max_mutations: 3,
        max_k: 3,
    };
    let a = check_equivalence(11, plan).unwrap().0;
    let b = check_equivalence(11, plan).unwrap().0;
    assert_eq!(a, b);
    assert!(a.passed(), "{}", a.to_text());
    assert_eq!(octahedron::tsystem::laurent_violations(), 0);
}
