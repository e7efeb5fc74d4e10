#pragma once

#include <string>

#include <json.hpp>

namespace railzone {

using OrderedJson = nlohmann::ordered_json;

/// Pretty-prints with every floating-point value in fixed notation with
/// `decimals` digits, so reports diff cleanly. Non-finite values become null.
std::string dump_fixed(const OrderedJson& value, int decimals = 6, int indent = 2);

}  // namespace railzone
