use runchart_core::oracle::{enumerate_pmf, StatisticKind};
use runchart_core::scan::{longest_run_pmf, ScanRoute};
use runchart_core::{runs_pmf, ConditionalPmf, RunsQuery, ScanEngine};

const TOL: f64 = 1e-10;

fn assert_same(label: &str, got: &ConditionalPmf, want: &ConditionalPmf) {
    let lo = got.min_value().min(want.min_value());
    let hi = got.max_value().max(want.max_value());
    for v in lo..=hi {
        let (a, b) = (got.prob(v), want.prob(v));
        assert!((a - b).abs() <= TOL, "{label}: value {v}: {a} vs {b}");
    }
}

#[test]
fn runs_and_longest_match_enumeration() {
    for n in 1..=12 {
        for n1 in 0..=n {
            let oracle = enumerate_pmf(n, n1, StatisticKind::RunsCount).unwrap();
            let exact = runs_pmf(RunsQuery::new(n, n1).unwrap()).unwrap();
            assert_same(&format!("runs n={n} n1={n1}"), &exact, &oracle);

            let oracle = enumerate_pmf(n, n1, StatisticKind::LongestRun).unwrap();
            let exact = longest_run_pmf(n, n1).unwrap();
            assert_same(&format!("longest n={n} n1={n1}"), &exact, &oracle);
        }
    }
}

#[test]
fn scan_matches_enumeration_on_every_route() {
    let engines = [
        ScanEngine::default(),
        ScanEngine::with_route(ScanRoute::Automaton),
    ];
    for n in 1..=12 {
        for n1 in 0..=n {
            for r in 1..=n {
                let oracle = enumerate_pmf(n, n1, StatisticKind::ScanMax { r }).unwrap();
                for engine in &engines {
                    let exact = engine.pmf(n, n1, r).unwrap();
                    assert_same(&format!("scan n={n} n1={n1} r={r}"), &exact, &oracle);
                }
            }
        }
    }
}

#[test]
fn wide_route_matches_enumeration() {
    let engine = ScanEngine::with_route(ScanRoute::WideWindow);
    for n in 2usize..=12 {
        for n1 in 0..=n {
            for r in n.div_ceil(2)..=n {
                let oracle = enumerate_pmf(n, n1, StatisticKind::ScanMax { r }).unwrap();
                let exact = engine.pmf(n, n1, r).unwrap();
                assert_same(&format!("wide n={n} n1={n1} r={r}"), &exact, &oracle);
            }
        }
    }
}
