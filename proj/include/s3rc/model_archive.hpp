#pragma once

#include <string>

#include "s3rc/classifier.hpp"

namespace s3rc {

inline constexpr int kArchiveFormatVersion = 1;

// Versioned JSON archive of a fitted model; matrices are stored as row-major
// nested arrays.  Serialization is byte-deterministic for a given model.
// Loading ignores unknown fields and fails with ParseError / DimensionError
// on malformed or inconsistent content.
void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

std::string to_string(Method m);
std::string to_string(CovMode m);
std::string to_string(PriorsMode m);
std::string to_string(VariationSource v);
Method method_from_string(const std::string& s);
CovMode cov_mode_from_string(const std::string& s);
PriorsMode priors_mode_from_string(const std::string& s);
VariationSource variation_source_from_string(const std::string& s);

}  // namespace s3rc
