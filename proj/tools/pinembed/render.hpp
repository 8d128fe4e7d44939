#pragma once

#include <string>

#include "json.hpp"

namespace pinembed::cli {

enum class Format { json, text };

/// JSON: sorted keys, two-space indent, shortest round-trip numbers.
/// Text: one aligned "key  value" line per leaf, nested keys joined by '.'.
std::string render(const nlohmann::json& value, Format format);

/// Non-finite doubles become null in JSON.
nlohmann::json number(double x);

}  // namespace pinembed::cli
