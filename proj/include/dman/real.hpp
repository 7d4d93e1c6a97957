#pragma once

#include <cstddef>
#include <vector>

namespace dman {

#ifdef DMAN_REAL_FLOAT
using Real = float;
#else
using Real = double;
#endif

using Shape = std::vector<std::size_t>;

}  // namespace dman
