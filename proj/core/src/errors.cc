// SPDX-License-Identifier: Apache-2.0
#include "xling/errors.h"

namespace xling {

std::string_view to_string(ItemErrorKind kind) {
  switch (kind) {
    case ItemErrorKind::kTransient:
      return "transient";
    case ItemErrorKind::kPermanent:
      return "permanent";
    case ItemErrorKind::kProtocol:
      return "protocol";
    case ItemErrorKind::kExtraction:
      return "extraction";
    case ItemErrorKind::kTranslation:
      return "translation";
    case ItemErrorKind::kQe:
      return "qe";
    case ItemErrorKind::kPrecondition:
      return "precondition";
    case ItemErrorKind::kVerdict:
      return "verdict";
  }
  return "unknown";
}

}  // namespace xling
