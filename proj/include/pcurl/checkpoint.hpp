#ifndef PCURL_CHECKPOINT_HPP_
#define PCURL_CHECKPOINT_HPP_

#include <cstdint>
#include <iosfwd>

#include "pcurl/env.hpp"

namespace pcurl {

// Text checkpoint: a header line "B T_cap V stage step seed", then one line
// per (bucket, position bucket) row holding V logits with 17 significant
// digits, row-major.
struct CheckpointFile {
  PolicyParams params;
  int stage = 0;
  long step = 0;
  std::uint64_t seed = 0;

  bool operator==(const CheckpointFile&) const = default;
};

void write_checkpoint(std::ostream& os, const CheckpointFile& ckpt);
// Throws ParseError with a line number.
CheckpointFile read_checkpoint(std::istream& is);

}  // namespace pcurl

#endif  // PCURL_CHECKPOINT_HPP_
