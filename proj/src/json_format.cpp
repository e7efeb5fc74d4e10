#include "railzone/json_format.hpp"

#include <cmath>
#include <cstdio>

namespace railzone {
namespace {

void write(const OrderedJson& v, int decimals, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case OrderedJson::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.*f", decimals, d);
      out += buf;
      return;
    }
    case OrderedJson::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + OrderedJson(it.key()).dump() + ": ";
        write(it.value(), decimals, indent, depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case OrderedJson::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Short arrays of scalars stay on one line (points, bboxes).
      bool flat = v.size() <= 4;
      for (const auto& e : v) flat = flat && !e.is_structured();
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        write(e, decimals, indent, depth + 1, out);
      }
      out += flat ? "]" : "\n" + close_pad + "]";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_fixed(const OrderedJson& value, int decimals, int indent) {
  std::string out;
  write(value, decimals, indent, 0, out);
  out += '\n';
  return out;
}

}  // namespace railzone
