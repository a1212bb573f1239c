// Instruction and answer templates for correction samples.
//
// Each template carries "{}" placeholders: one in an instruction (the
// mismatched caption), two in a replace answer (wrong text, correct text) and
// two in a swap answer (the swapped texts in their new order).

#ifndef ICCC_TEMPLATES_H_
#define ICCC_TEMPLATES_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace iccc {

struct TemplateSet {
  std::string preset;
  std::vector<std::string> instructions;
  std::vector<std::string> replace_answers;
  std::vector<std::string> swap_answers;
};

// Throws ConfigError if a list is empty or a placeholder count is wrong.
void validate_templates(const TemplateSet& templates);

std::size_t count_placeholders(std::string_view pattern);

// Substitutes "{}" placeholders left to right. Throws std::invalid_argument
// if the number of values differs from the number of placeholders.
std::string fill_template(std::string_view pattern,
                          const std::vector<std::string>& values);

// Built-in presets: "blip2" (single shortest instruction) and "instructblip"
// (all instructions). Both use every answer template.
const std::map<std::string, TemplateSet>& builtin_presets();

// Preset file: {"presets": {"<name>": {"instructions": [...],
// "replace_answers": [...], "swap_answers": [...]}}}.
std::map<std::string, TemplateSet> load_presets(
    const std::filesystem::path& path);
std::map<std::string, TemplateSet> parse_presets(std::string_view json_text);

// Looks `name` up in `presets_file` when given, else among the built-ins.
TemplateSet resolve_preset(std::string_view name,
                           const std::filesystem::path& presets_file = {});

}  // namespace iccc

#endif  // ICCC_TEMPLATES_H_
