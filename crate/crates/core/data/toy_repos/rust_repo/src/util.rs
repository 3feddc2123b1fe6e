pub fn label(n: usize) -> String {
    format!("{n} items")
}
