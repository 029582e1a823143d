#pragma once

#include <string>

#include "path.hpp"

// JSON model files. One breakpoints array shared by growth and migration;
// breakpoints are rationals ("1/3") or decimals; each segment carries the
// per-patch growth rates r and an optional migration matrix L (omitted L
// means no migration, which is how growth-only inputs for the DID tools are
// written).
//
//   {
//     "name": "two-patch-worst",
//     "n": 2,
//     "breakpoints": [0, "1/2"],
//     "segments": [
//       { "r": [1, -1],  "L": [[-1, 0], [1, 0]] },
//       { "r": [-2, 2],  "L": [[0, 1], [0, -1]] }
//     ]
//   }

namespace patchlam {

PatchModel parse_model(const std::string& json_text);
PatchModel load_model_file(const std::string& path);

std::string model_to_json(const PatchModel& model);
void save_model_file(const PatchModel& model, const std::string& path);

}  // namespace patchlam
