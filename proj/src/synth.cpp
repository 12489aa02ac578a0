#include <algorithm>
#include <string>
#include <vector>

#include "bloom/corpus.hpp"
#include "bloom/rng.hpp"

namespace bloom {

namespace {

// Question templates per cognitive process. `{np}` is a knowledge-dimension
// noun phrase, `{sys}` a case-study system. The leading verb carries the
// cognitive class.
const std::array<std::vector<std::string_view>, kNumCognitive> kTemplates = {{
    // Remember
    {"Define {np}.", "List {np}.", "Recall {np}.", "Identify {np}.", "State {np}.", "Name {np}.",
     "Define {np} with respect to the {sys}.", "List down {np}.", "Recognize {np} in the {sys}.",
     "Retrieve {np} from the course notes."},
    // Understand
    {"Explain {np}.", "Classify {np}.", "Compare {np} with an example.", "Explain {np} in detail.",
     "Summarize {np}.", "Describe {np} for the {sys}.", "Interpret {np}.", "Explain {np} with a suitable diagram.",
     "Contrast {np} with its alternatives.", "Categorize {np}."},
    // Apply
    {"Implement {np} for the {sys}.", "Execute {np} on the {sys}.", "Use {np} to build the {sys}.",
     "How do you measure {np}? Explain with any two metrics.", "Apply {np} to the {sys}.",
     "Demonstrate {np} on the {sys}.", "Carry out {np} for the {sys}.", "How is {np} used in the {sys}?",
     "Measure {np} for the {sys}.", "Solve the case of the {sys} using {np}."},
    // Evaluate
    {"Check {np} of the {sys}.", "Critique {np}.", "Judge {np} for the {sys}.", "Justify {np}.",
     "Critically evaluate {np}.", "Monitor {np} in the {sys}.", "Assess {np} and judge its suitability.",
     "Detect the weaknesses of {np}.", "Defend {np} for the {sys}.", "Appraise {np}."},
    // Analyze
    {"Differentiate {np} from related ideas.", "Organize {np} for the {sys}.", "Outline {np}.",
     "Distinguish between {np} and its variants.", "Analyze {np} in the {sys}.", "Discriminate {np}.",
     "Structure {np} for the {sys}.", "Break down {np} into parts.", "Examine {np} and its relationships.",
     "Integrate {np} into the {sys}."},
    // Create
    {"Design {np} for the {sys}.", "Plan {np} for the {sys}.", "Construct {np} for the {sys}.",
     "Generate {np} for the {sys}.", "Propose {np} for a new {sys}.", "Develop {np} for the {sys}.",
     "Produce {np} for the {sys}.", "Formulate {np}.", "Hypothesize {np} for the {sys}.",
     "Compose {np} for the {sys}."},
}};

// Noun phrases per knowledge dimension.
const std::array<std::vector<std::string_view>, kNumKnowledge> kNounPhrases = {{
    // Factual: terminology, specific details, elements.
    {"the term software crisis", "the phases of the software life cycle", "the types of software maintenance",
     "the role of product, process, and people in project management", "the characteristics of software",
     "the full form of CASE tools", "the elements of a data flow diagram", "the key terms of configuration management",
     "the stakeholders of a software project", "the attributes of good software",
     "the types of functional requirements", "the components of an SRS document", "the symbols used in a use case diagram",
     "the terminology of software quality", "the members of a software team", "the names of UML diagrams"},
    // Conceptual: models, principles, theories, classifications.
    {"conventional technique and object-oriented technique", "the spiral model", "the waterfall model",
     "coupling and cohesion", "the principles of agile development", "the concept of abstraction",
     "the theory of modularity", "the reliability growth theory", "the layered architecture model",
     "the capability maturity model", "the classification of design patterns", "the unified process model",
     "the principle of information hiding", "the incremental model", "the concept of software architecture styles",
     "the generalization of process frameworks"},
    // Procedural: steps, techniques, algorithms, methods, criteria.
    {"the activities of scheduling and tracking", "the steps of requirement elicitation",
     "the procedure of black box testing", "the algorithm for function point estimation",
     "the method of cost estimation using COCOMO", "the technique of white box testing",
     "the steps of risk mitigation", "the procedure of regression testing", "the steps of version control",
     "the method of basis path testing", "the criteria for code review", "the steps of software deployment",
     "the procedure for change control", "the technique of equivalence partitioning",
     "the method of cyclomatic complexity calculation", "the steps of a formal technical review"},
}};

const std::vector<std::string_view> kSystems = {
    "library management system", "online banking system",    "hospital management system",
    "railway reservation system", "ATM system",              "student information system",
    "inventory control system",   "online shopping portal",  "payroll system",
    "hotel booking system"};

std::string fill(std::string_view tmpl, std::string_view np, std::string_view sys) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.substr(i).starts_with("{np}")) {
      out += np;
      i += 4;
    } else if (tmpl.substr(i).starts_with("{sys}")) {
      out += sys;
      i += 5;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

}  // namespace

CorpusDataset generate_synthetic_corpus(const DistributionTable& dist, std::uint64_t seed) {
  const auto cells = allocate_joint_counts(dist, seed);

  std::vector<std::pair<CognitiveLabel, KnowledgeLabel>> labels;
  for (std::size_t i = 0; i < kNumCognitive; ++i) {
    for (std::size_t j = 0; j < kNumKnowledge; ++j) {
      for (std::int64_t k = 0; k < cells[i][j]; ++k) {
        labels.emplace_back(static_cast<CognitiveLabel>(i), static_cast<KnowledgeLabel>(j));
      }
    }
  }

  Rng rng(mix_seed(seed, 0x7e47ULL));
  rng.shuffle(std::span(labels));

  CorpusDataset ds;
  ds.source = "synthetic:seed=" + std::to_string(seed);
  ds.records.reserve(labels.size());
  for (const auto& [cog, know] : labels) {
    const auto& templates = kTemplates[static_cast<std::size_t>(cog)];
    const auto& phrases = kNounPhrases[static_cast<std::size_t>(know)];
    const auto tmpl = templates[rng.below(templates.size())];
    const auto np = phrases[rng.below(phrases.size())];
    const auto sys = kSystems[rng.below(kSystems.size())];
    ds.records.push_back({fill(tmpl, np, sys), cog, know});
  }
  return ds;
}

}  // namespace bloom
