#pragma once

namespace core {
inline int boot() { return 0; }
}
