#include "vidmod/taxonomy.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace vidmod {

using nlohmann::json;

const MajorCategory* LabelTree::find_major(const std::string& major_id) const {
    for (const auto& m : majors) {
        if (m.id == major_id) return &m;
    }
    return nullptr;
}

std::optional<SubCategory> LabelTree::lookup(const std::string& major_id,
                                             const std::string& sub_id) const {
    const MajorCategory* m = find_major(major_id);
    if (!m) return std::nullopt;
    for (const auto& s : m->subs) {
        if (s.id == sub_id) return s;
    }
    return std::nullopt;
}

namespace {

LabelTree tree_from_json(const json& j) {
    LabelTree tree;
    if (!j.is_object() || !j.contains("majors") || !j["majors"].is_array()) {
        throw TaxonomyError("taxonomy: expected object with \"majors\" array");
    }
    if (j["majors"].empty()) {
        throw TaxonomyError("taxonomy: \"majors\" must be non-empty");
    }
    std::unordered_set<std::string> major_ids;
    for (const auto& jm : j["majors"]) {
        MajorCategory m;
        m.id = jm.at("id").get<std::string>();
        m.name = jm.at("name").get<std::string>();
        if (m.id.empty()) throw TaxonomyError("taxonomy: empty major id");
        if (!major_ids.insert(m.id).second) {
            throw TaxonomyError("taxonomy: duplicate major id \"" + m.id + "\"");
        }
        if (!jm.contains("subs") || !jm["subs"].is_array() || jm["subs"].empty()) {
            throw TaxonomyError("taxonomy: major \"" + m.id +
                                "\" must have a non-empty \"subs\" array");
        }
        std::unordered_set<std::string> sub_ids;
        for (const auto& js : jm["subs"]) {
            SubCategory s;
            s.id = js.at("id").get<std::string>();
            s.name = js.at("name").get<std::string>();
            if (s.id.empty()) {
                throw TaxonomyError("taxonomy: empty sub id under \"" + m.id + "\"");
            }
            if (!sub_ids.insert(s.id).second) {
                throw TaxonomyError("taxonomy: duplicate sub id \"" + s.id +
                                    "\" under major \"" + m.id + "\"");
            }
            if (!js.contains("rules") || !js["rules"].is_array() ||
                js["rules"].empty()) {
                throw TaxonomyError("taxonomy: sub \"" + s.id +
                                    "\" must have at least one rule");
            }
            for (const auto& r : js["rules"]) {
                s.rules.push_back(r.get<std::string>());
            }
            m.subs.push_back(std::move(s));
        }
        tree.majors.push_back(std::move(m));
    }
    return tree;
}

}  // namespace

LabelTree parse_taxonomy(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw TaxonomyError(std::string("taxonomy: ") + e.what());
    }
    try {
        return tree_from_json(j);
    } catch (const json::exception& e) {
        throw TaxonomyError(std::string("taxonomy: ") + e.what());
    }
}

LabelTree load_taxonomy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TaxonomyError("taxonomy: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_taxonomy(buf.str());
}

const std::string& builtin_taxonomy_json() {
    static const std::string text = R"({
  "majors": [
    {
      "id": "marketing_exaggerate", "name": "Marketing Exaggerate",
      "subs": [
        {"id": "misleading_claims", "name": "Misleading Claims",
         "rules": ["Claims that exaggerate product efficacy without evidence."]},
        {"id": "fake_endorsement", "name": "Fake Endorsement",
         "rules": ["Fabricated celebrity or expert endorsements.",
                   "Forged certification marks or awards."]},
        {"id": "unrealistic_results", "name": "Unrealistic Results",
         "rules": ["Before/after depictions that no real product could achieve."]}
      ]
    },
    {
      "id": "discomforting_content", "name": "Discomforting Content",
      "subs": [
        {"id": "gory_content", "name": "Gory Content",
         "rules": ["Graphic depiction of blood, wounds, or mutilation."]},
        {"id": "horror_imagery", "name": "Horror Imagery",
         "rules": ["Jump scares or disturbing supernatural imagery in ads."]},
        {"id": "medical_procedures", "name": "Medical Procedures",
         "rules": ["Close-up surgical or invasive procedure footage."]}
      ]
    },
    {
      "id": "vulgar_content", "name": "Vulgar Content",
      "subs": [
        {"id": "sexual_innuendo", "name": "Sexual Innuendo",
         "rules": ["Sexually suggestive framing of products or actors."]},
        {"id": "crude_language", "name": "Crude Language",
         "rules": ["Profanity or obscene gestures, spoken or overlaid."]},
        {"id": "indecent_exposure", "name": "Indecent Exposure",
         "rules": ["Nudity or near-nudity unrelated to the product."]}
      ]
    },
    {
      "id": "requiring_credential_review", "name": "Requiring Credential Review",
      "subs": [
        {"id": "medical_claims", "name": "Medical Claims",
         "rules": ["Health treatment claims requiring a medical license."]},
        {"id": "financial_services", "name": "Financial Services",
         "rules": ["Loan, investment, or insurance offers without a permit."]},
        {"id": "legal_services", "name": "Legal Services",
         "rules": ["Legal representation offers without bar credentials."]},
        {"id": "education_credentials", "name": "Education Credentials",
         "rules": ["Degree or certification programs without accreditation."]}
      ]
    },
    {
      "id": "prohibited_goods_services", "name": "Prohibited Goods/Services",
      "subs": [
        {"id": "weapons", "name": "Weapons",
         "rules": ["Sale or promotion of firearms, blades, or explosives."]},
        {"id": "controlled_substances", "name": "Controlled Substances",
         "rules": ["Promotion of drugs or regulated chemicals."]},
        {"id": "counterfeit_goods", "name": "Counterfeit Goods",
         "rules": ["Replica branded goods sold as genuine."]},
        {"id": "gambling_services", "name": "Gambling Services",
         "rules": ["Unlicensed betting or lottery promotions."]}
      ]
    },
    {
      "id": "platform_policy_violation", "name": "Platform Policy Violation",
      "subs": [
        {"id": "off_platform_redirect", "name": "Off-Platform Redirect",
         "rules": ["QR codes or links diverting users off the platform."]},
        {"id": "engagement_bait", "name": "Engagement Bait",
         "rules": ["Promises of rewards for likes, shares, or follows."]},
        {"id": "repetitive_spam", "name": "Repetitive Spam",
         "rules": ["Identical creative re-posted to evade frequency caps."]}
      ]
    }
  ]
})";
    return text;
}

const LabelTree& builtin_taxonomy() {
    static const LabelTree tree = parse_taxonomy(builtin_taxonomy_json());
    return tree;
}

}  // namespace vidmod
