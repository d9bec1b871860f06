//! Replenishing query budget with carry-over.

use itta::active::BudgetState;

fn main() -> itta::Result<()> {
    let mut budget = BudgetState::new(0.01, 1000)?;
    for i in 1..=3500u64 {
        let granted = budget.tick();
        if granted > 0 {
            println!("sample {i:>4}: +{granted}, remaining {}", budget.remaining);
        }
        // spend 3 queries early in each window
        if (i - 1) % 1000 < 3 {
            budget.consume();
        }
    }
    println!(
        "granted {}, consumed {}, remaining {}",
        budget.total_granted, budget.total_consumed, budget.remaining
    );
    Ok(())
}
