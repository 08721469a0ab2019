#pragma once

#include <set>
#include <string>

namespace envalign {

// Bundled standard-library module names for the analyzed language family.
// Overridable through tool configuration.
const std::set<std::string>& default_stdlib_names();

}  // namespace envalign
