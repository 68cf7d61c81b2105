#include "options.hpp"

#include <charconv>
#include <fstream>

namespace wdm::cli {

bool OptionBinder::has(std::string_view key) const {
  for (const auto& b : bindings_) {
    if (b.key == key) return true;
  }
  return false;
}

std::vector<std::string> OptionBinder::apply(const Json& config) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : config.items()) {
    bool known = false;
    for (auto& b : bindings_) {
      if (b.key != key) continue;
      known = true;
      if (b.option->count() > 0) break;
      try {
        b.set(value);
      } catch (const Json::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
      }
      break;
    }
    if (!known) unknown.push_back(key);
  }
  return unknown;
}

void OptionBinder::dump_into(Json& out) const {
  for (const auto& b : bindings_) out[b.key] = b.get();
}

Dims3 parse_dims(const std::string& text) {
  std::vector<std::size_t> parts;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (p < end) {
    std::size_t v = 0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || v == 0) throw UsageError("bad dims '" + text + "'; expected N or DxHxW");
    parts.push_back(v);
    p = next;
    if (p < end) {
      if (*p != 'x' && *p != 'X') throw UsageError("bad dims '" + text + "'; expected N or DxHxW");
      ++p;
      if (p == end) throw UsageError("bad dims '" + text + "'; expected N or DxHxW");
    }
  }
  if (parts.size() == 1) return {parts[0], parts[0], parts[0]};
  if (parts.size() == 3) return {parts[0], parts[1], parts[2]};
  throw UsageError("bad dims '" + text + "'; expected N or DxHxW");
}

Json dims_json(const Dims3& dims) { return Json::array({dims.d, dims.h, dims.w}); }

std::filesystem::path require_output_dir(const Context& ctx) {
  if (ctx.global.output_dir.empty()) throw UsageError("--output-dir is required");
  std::filesystem::path dir(ctx.global.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json(const std::filesystem::path& path, const Json& value) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << value.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace wdm::cli
