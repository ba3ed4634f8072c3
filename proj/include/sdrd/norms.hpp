#pragma once

#include <stdexcept>

#include "sdrd/basis.hpp"
#include "sdrd/history.hpp"

namespace sdrd {

enum class NormKind { L2, Lq, V1, V2, Linf };

inline double spatial_norm(const EigenBasis& basis, const ModalState& a, NormKind kind,
                           double q = 2.0) {
  switch (kind) {
    case NormKind::L2: return basis.l2_norm(a);
    case NormKind::Lq: return basis.lq_norm(a, q);
    case NormKind::V1: return basis.v1_norm(a);
    case NormKind::V2: return basis.v2_norm(a);
    case NormKind::Linf: return basis.linf_norm(a);
  }
  throw std::logic_error("unknown norm kind");
}

// Window norms over [t-r, t]: continuous-in-time norms sample midpoints as
// well as nodes; essential-sup norms take the node maximum (trajectories are
// continuous at solver resolution, so sup and ess-sup coincide).
enum class WindowNormKind { C_L2, C_V1, LinfLq, LinfLinf };

inline double window_norm(const HistorySegment& seg, const EigenBasis& basis,
                          WindowNormKind kind, double q = 2.0) {
  switch (kind) {
    case WindowNormKind::C_L2:
      return seg.window_max([&](const ModalState& a) { return basis.l2_norm(a); }, true);
    case WindowNormKind::C_V1:
      return seg.window_max([&](const ModalState& a) { return basis.v1_norm(a); }, true);
    case WindowNormKind::LinfLq:
      return seg.window_max([&](const ModalState& a) { return basis.lq_norm(a, q); }, false);
    case WindowNormKind::LinfLinf:
      return seg.window_max([&](const ModalState& a) { return basis.linf_norm(a); }, false);
  }
  throw std::logic_error("unknown window norm kind");
}

}  // namespace sdrd
