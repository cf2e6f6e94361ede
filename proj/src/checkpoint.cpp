#include "pcurl/checkpoint.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pcurl/error.hpp"
#include "pcurl/metrics.hpp"

namespace pcurl {

void write_checkpoint(std::ostream& os, const CheckpointFile& ckpt) {
  const auto& p = ckpt.params;
  os << p.buckets() << ' ' << p.t_cap() << ' ' << p.vocab() << ' ' << ckpt.stage << ' '
     << ckpt.step << ' ' << ckpt.seed << '\n';
  for (int b = 0; b < p.buckets(); ++b) {
    for (int t = 0; t < p.t_cap(); ++t) {
      const auto row = p.row(b, t);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) os << ' ';
        os << format_real(row[k]);
      }
      os << '\n';
    }
  }
}

CheckpointFile read_checkpoint(std::istream& is) {
  std::string line;
  int lineno = 1;
  if (!std::getline(is, line)) throw ParseError("empty checkpoint", lineno);
  std::istringstream header(line);
  int buckets = 0, t_cap = 0, vocab = 0;
  CheckpointFile out;
  if (!(header >> buckets >> t_cap >> vocab >> out.stage >> out.step >> out.seed)) {
    throw ParseError("bad checkpoint header", lineno);
  }
  if (buckets < 1 || t_cap < 1 || vocab < 2) throw ParseError("bad dimensions", lineno);
  out.params = PolicyParams(buckets, t_cap, vocab);
  for (int b = 0; b < buckets; ++b) {
    for (int t = 0; t < t_cap; ++t) {
      ++lineno;
      if (!std::getline(is, line)) throw ParseError("truncated checkpoint", lineno);
      std::istringstream row(line);
      for (int k = 0; k < vocab; ++k) {
        std::string cell;
        if (!(row >> cell)) throw ParseError("too few values", lineno);
        try {
          std::size_t used = 0;
          out.params.at(b, t, k) = std::stod(cell, &used);
          if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::logic_error&) {
          throw ParseError("bad value '" + cell + "'", lineno);
        }
      }
      std::string extra;
      if (row >> extra) throw ParseError("too many values", lineno);
    }
  }
  return out;
}

}  // namespace pcurl
