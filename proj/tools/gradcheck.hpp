#pragma once

#include <cstddef>
#include <cstdint>

namespace clothccd::gradcheck {

struct Summary {
  int fixtures = 0;
  std::size_t events = 0;
  /// Largest |analytic - numeric| / max(|analytic|, |numeric|) over fixtures,
  /// norms taken over the whole gradient field.
  double max_relative_error = 0.0;
};

/// Random multi-event self-collision fixtures; events and t_safe frozen.
Summary check_ccd_loss(int fixtures, std::uint64_t seed, double epsilon);

/// Random cloth points around an icosphere; face assignment frozen.
Summary check_contact_loss(int fixtures, std::uint64_t seed);

}  // namespace clothccd::gradcheck
