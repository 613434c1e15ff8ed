#pragma once

#include <string>

#include "smdp/model.hpp"
#include "smdp/options.hpp"

namespace smdp {

/// Text form of a model; see docs/file-format.md. Doubles round-trip exactly.
std::string dump_model(const SmdpModel& m);
/// Parses and validates a model. Throws ValidationError on any problem.
SmdpModel parse_model(const std::string& text);

std::string dump_options(const OptionSet& set);
OptionSet parse_options(const std::string& text);

SmdpModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const SmdpModel& m);
OptionSet read_options_file(const std::string& path);
void write_options_file(const std::string& path, const OptionSet& set);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace smdp
