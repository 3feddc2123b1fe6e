mod store;
mod util;

use crate::store::Store;

fn main() {
    let store = Store::open();
    println!("{}", util::label(store.len()));
}
