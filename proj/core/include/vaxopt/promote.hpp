#pragma once

#include "vaxopt/nn/tape.hpp"

#include <type_traits>

namespace vaxopt {

/// Var if any argument type is a recorded Var, double otherwise.
template <class... Ts>
using promote_t = std::conditional_t<(std::is_same_v<std::remove_cvref_t<Ts>, nn::Var> || ...), nn::Var, double>;

} // namespace vaxopt
