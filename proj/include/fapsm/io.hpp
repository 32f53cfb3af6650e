#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fapsm/associative.hpp"
#include "fapsm/evaluation.hpp"
#include "fapsm/signature.hpp"
#include "fapsm/weights.hpp"

namespace fapsm::io {

// Text formats. Every real is written in shortest round-trip decimal form, so
// write -> read reproduces values bit for bit.
//
//   signature store  "fapsm-sig v1 b=<b> m=<m>"
//                    "<id>|<o_1>,...,<o_m>|<block 1>|...|<block m>"
//   model            "fapsm-model v1 mode=.. m=.. lambda1=.. t=.. kernel=.. sigma=.. nk=.."
//                    then W rows (linear) or n_k support rows then n_k alpha rows
//   weights          "fapsm-weights v1 m=<m> lambda2=<lambda2>" then one row of m values
//   split results    CSV "split,<method1>,<method2>,..."
//   identity names   "fapsm-names v1" then "<id>,<name>"

struct SignatureRecord {
  Label identity;  // kRejected in unlabeled probe stores
  Signature signature;
};

void write_signature_store(std::ostream& os, Index feature_dim, Index patch_count,
                           const std::vector<SignatureRecord>& records);
std::vector<SignatureRecord> read_signature_store(std::istream& is);

void write_gallery(std::ostream& os, const Gallery& gallery);
void write_probes(std::ostream& os, const ProbeSet& probes);
Gallery read_gallery(std::istream& is);
/// Labeled when every record carries a real identity, unlabeled when all are -1.
ProbeSet read_probes(std::istream& is);

void write_model(std::ostream& os, const AssociativeModel<double>& model);
AssociativeModel<double> read_model(std::istream& is);

void write_weights(std::ostream& os, const PatchWeights<double>& weights);
PatchWeights<double> read_weights(std::istream& is);

SplitResults read_split_results(std::istream& is);
void write_split_results(std::ostream& os, const SplitResults& results);

void write_identity_map(std::ostream& os, const IdentityMap& names);
IdentityMap read_identity_map(std::istream& is);

struct ConfigEntry {
  std::string value;
  int line;
};

/// "key = value" lines; '#' starts a comment. Later keys override earlier ones.
std::map<std::string, ConfigEntry> read_key_values(std::istream& is);

// Path wrappers; failures to open raise Errc::io_failure.
Gallery load_gallery(const std::filesystem::path& path);
ProbeSet load_probes(const std::filesystem::path& path);
AssociativeModel<double> load_model(const std::filesystem::path& path);
PatchWeights<double> load_weights(const std::filesystem::path& path);
SplitResults load_split_results(const std::filesystem::path& path);
std::map<std::string, ConfigEntry> load_key_values(const std::filesystem::path& path);

/// Writes via a temporary sibling and renames, so readers never see partial files.
void save_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace fapsm::io
