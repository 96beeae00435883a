#pragma once

// Dataset files and reconstruction reports. Both belong to the same text
// family as traces:
//
//   insideout-dataset 1          insideout-report 1
//   n 2                          n 2
//   data                         converged 1
//   0 0.6 0.5                    residual_norm 3.4e-17
//   1 0.2 0.4                    iterations 7
//   end                          starts_tried 1
//                                data
//                                0 0.59996 0.50002
//                                ...
//                                end

#include <iosfwd>
#include <string>

#include "insideout/model.hpp"
#include "insideout/solver.hpp"

namespace insideout {

void save_dataset(const Dataset& data, std::ostream& out);

/// Reads the "data" section of a dataset or report file.
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);

void save_report(const ReconstructionResult& result, std::ostream& out);

ReconstructionResult load_report(std::istream& in);

}  // namespace insideout
