use planar_gravity::acceptance::{run_criterion, Level, Options, KNOWN_FAILURES};

#[test]
fn acceptance_suite() {
    let opts = Options::new(Level::Fast);
    let mut unexpected = Vec::new();
    for id in 1..=15 {
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        if r.pass == KNOWN_FAILURES.contains(&id) {
            unexpected.push(r.line());
        }
    }
    assert!(unexpected.is_empty(), "unexpected outcomes:\n{}", unexpected.join("\n"));
}
