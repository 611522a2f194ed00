//! Builds a small order-handling model with the constructors and prints it
//! as text and as POWL JSON.

use promodel::powl::{to_json_pretty, validate, Dependency, PowlModel, PowlError};

fn main() -> Result<(), PowlError> {
    let receive = PowlModel::activity("Receive order")?;
    let check = PowlModel::activity("Check stock")?;
    let pick = PowlModel::activity("Pick items")?;
    let invoice = PowlModel::activity("Send invoice")?;
    let reject = PowlModel::activity("Reject order")?;
    let ship = PowlModel::activity("Ship")?;

    // Picking and invoicing may happen in either order.
    let fulfil = PowlModel::partial_order(vec![
        Dependency::Edge(pick.clone(), ship.clone()),
        Dependency::Edge(invoice.clone(), ship),
    ])?;
    let decide = PowlModel::xor(vec![Some(fulfil), Some(reject)])?;
    let recheck = PowlModel::loop_(Some(check), None)?;
    let model = PowlModel::partial_order(vec![
        Dependency::Edge(receive.clone(), recheck.clone()),
        Dependency::Edge(recheck, decide),
    ])?;

    println!("{model}");
    println!("{} activities, valid: {}", model.activity_count(), validate(&model).is_empty());
    println!("{}", to_json_pretty(&model));

    // Reusing an instance is caught by validation; copies are fine.
    let shared = PowlModel::xor(vec![Some(receive.clone()), Some(receive.clone())])?;
    for v in validate(&shared) {
        println!("shared: {v}");
    }
    let copied = PowlModel::xor(vec![Some(receive.clone()), Some(receive.deep_copy())])?;
    println!("copied: {} violations", validate(&copied).len());
    Ok(())
}
