//! Checks a translated model and a hand-built broken net for soundness.
//!
//! The broken net chooses between paying and an installment agreement but
//! then waits for both before delivering, so it can never finish.

use promodel::conversion::{check_soundness, to_petri_net, PetriNet, SoundnessReport, DEFAULT_STATE_CAP};
use promodel::powl::{Dependency, PowlModel};

fn report(name: &str, r: &SoundnessReport) {
    println!("{name}: sound={} explored={}", r.sound, r.explored_states);
    for v in &r.violations {
        println!("  {:?}: {}", v.kind, v.detail);
    }
}

fn broken_net() -> PetriNet {
    let mut net = PetriNet::new("payment");
    let [i, chosen, paid, agreed, o] = ["i", "chosen", "paid", "agreed", "o"].map(|p| net.add_place(p));
    let select = net.add_transition("select", Some("Select items".into()));
    net.add_input(i, select);
    net.add_output(select, chosen);
    let pay = net.add_transition("pay", Some("Pay".into()));
    net.add_input(chosen, pay);
    net.add_output(pay, paid);
    let install = net.add_transition("install", Some("Complete installment agreement".into()));
    net.add_input(chosen, install);
    net.add_output(install, agreed);
    let deliver = net.add_transition("deliver", Some("Deliver".into()));
    net.add_input(paid, deliver);
    net.add_input(agreed, deliver);
    net.add_output(deliver, o);
    net.initial_marking.insert(i, 1);
    net.final_marking.insert(o, 1);
    net
}

fn main() {
    let select = PowlModel::activity("Select items").unwrap();
    let payment = PowlModel::xor(vec![
        Some(PowlModel::activity("Pay").unwrap()),
        Some(PowlModel::activity("Complete installment agreement").unwrap()),
    ])
    .unwrap();
    let deliver = PowlModel::activity("Deliver").unwrap();
    let model = PowlModel::partial_order(vec![
        Dependency::Edge(select, payment.clone()),
        Dependency::Edge(payment, deliver),
    ])
    .unwrap();
    let net = to_petri_net(&model).unwrap();
    report("from model", &check_soundness(&net, DEFAULT_STATE_CAP));
    report("hand-built", &check_soundness(&broken_net(), DEFAULT_STATE_CAP));
}
