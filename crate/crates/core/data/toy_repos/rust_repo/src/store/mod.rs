pub struct Store {
    items: Vec<String>,
}

impl Store {
    pub fn open() -> Self {
        Store { items: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }
}
