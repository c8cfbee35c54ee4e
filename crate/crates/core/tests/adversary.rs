use pollbench_core::adversary::*;
use pollbench_core::benchmarks::brute_force_optimal;
use pollbench_core::engine::simulate;
use pollbench_core::time::{int, rational};
use pollbench_core::trace::check_trace;
use pollbench_core::Time;

fn realize(family: &AdversarialFamily) {
    let policy = family.target.instantiate(&family.instance).unwrap();
    let trace = simulate(policy, &family.instance).unwrap();
    check_trace(&trace, &family.instance).unwrap();
    if family.online_exact {
        assert_eq!(trace.total(), family.online_bound, "{} {:?}", family.name, family.params);
    } else {
        assert!(trace.total() >= family.online_bound, "{} {:?}", family.name, family.params);
    }
    let offline = family.offline_schedule().unwrap();
    check_trace(&offline, &family.instance).unwrap();
    assert!(offline.total() <= family.offline_bound, "{} {:?}", family.name, family.params);
    if family.instance.n() <= 9 {
        let optimum = brute_force_optimal(&family.instance, 10).unwrap().total;
        assert!(optimum <= family.offline_bound, "{} {:?}", family.name, family.params);
    }
}

fn all_families() -> Vec<AdversarialFamily> {
    let mut out = Vec::new();
    for k in 2..=4 {
        for n in [1, 2, 5] {
            out.push(cyclic_tightness(k, int(1), n, rational(1, 2)).unwrap());
            out.push(unbounded_workload(k, n, rational(1, 3), int(2)).unwrap());
            out.push(limited_setups(k, n, 2, int(1)).unwrap());
            out.push(routing_class(RoutingClass::JobPriority, k, int(n as i128), int(3)).unwrap());
        }
        out.push(routing_class(RoutingClass::QueueLength, k, int(7), rational(3, 2)).unwrap());
    }
    for (n, p, tau) in [(1, 0, 1), (3, 2, 5), (6, 6, 1)] {
        out.push(longest_queue_trap(n, int(p), int(tau)).unwrap());
    }
    for route in [vec![1, 2], vec![1, 2, 3], vec![2, 1, 3], vec![1, 2, 1, 3], vec![1, 3, 2, 4]] {
        out.push(static_route(&route, 2).unwrap());
    }
    out.push(single_job(rational(5, 2)).unwrap());
    out
}

#[test]
fn families_are_realizable() {
    for family in all_families() {
        realize(&family);
    }
}

#[test]
fn growing_families_diverge() {
    let ratios = |f: &dyn Fn(usize) -> AdversarialFamily| -> Vec<_> {
        [5, 10, 20].iter().map(|&n| f(n).bound_ratio().unwrap()).collect()
    };
    let paths: [&dyn Fn(usize) -> AdversarialFamily; 3] = [
        &|n| unbounded_workload(3, n, rational(1, 2), int(1)).unwrap(),
        &|n| limited_setups(2, n, 1, int(n as i128)).unwrap(),
        &|n| longest_queue_trap(n, int(n as i128), int(1)).unwrap(),
    ];
    for path in paths {
        let r = ratios(path);
        assert!(r[0] < r[1] && r[1] < r[2], "{r:?}");
    }
}

#[test]
fn cyclic_tightness_approaches_four() {
    let r: Vec<_> = [50, 100, 200]
        .iter()
        .map(|&n| cyclic_tightness(3, int(1), n, rational(1, 2)).unwrap().bound_ratio().unwrap())
        .collect();
    assert!(r[0] < r[1] && r[1] < r[2] && r[2] < int(4));
}

#[test]
fn static_route_limit() {
    let f = static_route(&[1, 2, 3], 400).unwrap();
    realize(&f);
    assert!(f.bound_ratio().unwrap() > rational(29, 10));
}

#[test]
fn constructed_schedule_meets_closed_form() {
    let f = longest_queue_trap(4, int(2), int(3)).unwrap();
    assert_eq!(f.constructed().unwrap().total, f.offline_bound);
    assert_eq!(f.offline_bound, Time::from_int(4 * 3 + 2 * 3 + 2));
}
