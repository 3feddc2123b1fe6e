#include "core/engine.hpp"

int main() {
    return core::boot();
}
