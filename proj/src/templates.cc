#include "iccc/templates.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "iccc/error.h"
#include "json.hpp"

namespace iccc {
namespace {

constexpr std::string_view kPlaceholder = "{}";

const std::vector<std::string> kInstructions = {
    R"(Check the caption: "{}")",
    R"(Check the caption according to the image: "{}")",
    R"(Based on the image, please correct the caption: "{}")",
};

const std::vector<std::string> kReplaceAnswers = {
    R"("{}" should be "{}")",
    R"("{}" could be "{}")",
    R"("{}" is "{}")",
    R"("{}" actually is "{}")",
};

const std::vector<std::string> kSwapAnswers = {
    R"("{}" and "{}" are swapped)",
    R"("{}" and "{}" need to switch)",
    R"("{}" and "{}" should exchange positions)",
    R"("{}" and "{}" need to be swapped)",
};

void check_list(const std::vector<std::string>& list, std::size_t slots,
                const std::string& what, const std::string& preset) {
  if (list.empty())
    throw ConfigError("preset '" + preset + "': no " + what + " templates");
  for (const auto& t : list)
    if (count_placeholders(t) != slots)
      throw ConfigError("preset '" + preset + "': " + what + " template '" +
                        t + "' needs exactly " + std::to_string(slots) +
                        " placeholder(s)");
}

}  // namespace

std::size_t count_placeholders(std::string_view pattern) {
  std::size_t n = 0;
  for (auto pos = pattern.find(kPlaceholder); pos != std::string_view::npos;
       pos = pattern.find(kPlaceholder, pos + kPlaceholder.size()))
    ++n;
  return n;
}

void validate_templates(const TemplateSet& t) {
  check_list(t.instructions, 1, "instruction", t.preset);
  check_list(t.replace_answers, 2, "replace answer", t.preset);
  check_list(t.swap_answers, 2, "swap answer", t.preset);
}

std::string fill_template(std::string_view pattern,
                          const std::vector<std::string>& values) {
  std::string out;
  std::size_t used = 0;
  std::size_t start = 0;
  for (auto pos = pattern.find(kPlaceholder); pos != std::string_view::npos;
       pos = pattern.find(kPlaceholder, start)) {
    if (used == values.size())
      throw std::invalid_argument("too few template values");
    out.append(pattern.substr(start, pos - start));
    out += values[used++];
    start = pos + kPlaceholder.size();
  }
  if (used != values.size())
    throw std::invalid_argument("too many template values");
  out.append(pattern.substr(start));
  return out;
}

const std::map<std::string, TemplateSet>& builtin_presets() {
  static const auto* presets = new std::map<std::string, TemplateSet>{
      {"blip2", {"blip2", {kInstructions[0]}, kReplaceAnswers, kSwapAnswers}},
      {"instructblip",
       {"instructblip", kInstructions, kReplaceAnswers, kSwapAnswers}},
  };
  return *presets;
}

std::map<std::string, TemplateSet> parse_presets(std::string_view json_text) {
  using nlohmann::json;
  std::map<std::string, TemplateSet> out;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed preset file: ") + e.what(),
                     e.byte);
  }
  try {
    for (const auto& [name, body] : doc.at("presets").items()) {
      TemplateSet t;
      t.preset = name;
      t.instructions = body.at("instructions").get<std::vector<std::string>>();
      t.replace_answers =
          body.at("replace_answers").get<std::vector<std::string>>();
      t.swap_answers = body.at("swap_answers").get<std::vector<std::string>>();
      validate_templates(t);
      out.emplace(name, std::move(t));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad preset file: ") + e.what());
  }
  return out;
}

std::map<std::string, TemplateSet> load_presets(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_presets(buf.str());
}

TemplateSet resolve_preset(std::string_view name,
                           const std::filesystem::path& presets_file) {
  const auto presets =
      presets_file.empty() ? builtin_presets() : load_presets(presets_file);
  auto it = presets.find(std::string(name));
  if (it == presets.end())
    throw ConfigError("unknown template preset '" + std::string(name) + "'");
  return it->second;
}

}  // namespace iccc
