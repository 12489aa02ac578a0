#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bloom/corpus.hpp"
#include "bloom/model.hpp"
#include "bloom/textpipe.hpp"

namespace bloom {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Everything needed to run a trained model on raw question text.
struct SavedModel {
  ModelParams params;
  Task task = Task::Cognitive;
  Vocabulary vocab;
  KeyValues config;  // training configuration snapshot, in key order
};

/// Throws ValidationError when the parameters do not fit the task's class
/// count, the vocabulary size, or each other.
void validate_model_shapes(const ModelParams& params, Task task, const Vocabulary& vocab);

/// Versioned text format: header lines (architecture, task, vocab hash,
/// config), one `tensor` record per array with its shape and values in
/// shortest round-trip decimal form, then the embedded vocabulary.
std::string serialize_model(const SavedModel& model);
SavedModel deserialize_model(std::string_view text);

void save_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace bloom
