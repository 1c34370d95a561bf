#include "synthetic.hpp"

#include <array>
#include <string_view>

namespace synthetic {
namespace {

using mgtd::SplitMix64;

struct Topic {
  std::string_view subject;   // "le wifi"
  std::string_view thing;     // "la box"
  std::string_view problem;   // "le signal se dégrade"
  std::string_view action;    // "redémarrer la box"
};

constexpr std::array<Topic, 12> kTopics{{
    {"le wifi", "la box", "le signal se dégrade le soir", "redémarrer la box"},
    {"la voiture", "le moteur", "le moteur fait un bruit bizarre", "vérifier le niveau d'huile"},
    {"les impôts", "la déclaration", "le montant a augmenté cette année", "contacter le centre des impôts"},
    {"le sommeil", "le matelas", "je me réveille fatigué", "limiter les écrans le soir"},
    {"la cuisine", "le four", "le gâteau retombe à la sortie du four", "baisser la température du four"},
    {"la banque", "le compte", "des frais apparaissent sur le compte", "comparer les offres des banques"},
    {"l'ordinateur", "le processeur", "l'ordinateur chauffe beaucoup", "nettoyer le ventilateur"},
    {"le jardin", "les tomates", "les feuilles des tomates jaunissent", "arroser au pied le matin"},
    {"le loyer", "le bail", "le propriétaire augmente le loyer", "relire les clauses du bail"},
    {"le travail", "le contrat", "mon employeur refuse mes congés", "consulter la convention collective"},
    {"le train", "le billet", "les billets coûtent de plus en plus cher", "réserver plusieurs semaines à l'avance"},
    {"le téléphone", "la batterie", "la batterie se vide très vite", "désactiver les applications en arrière-plan"},
}};

template <std::size_t N>
std::string_view pick(SplitMix64& rng, const std::array<std::string_view, N>& xs) {
  return xs[rng.below(N)];
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

constexpr std::array<std::string_view, 8> kMachineOpeners{
    "Il existe plusieurs raisons pour lesquelles ",
    "Il peut y avoir plusieurs explications au fait que ",
    "Il est important de comprendre pourquoi ",
    "Cela peut s'expliquer par différents facteurs lorsque ",
    "Il y a plusieurs éléments à considérer lorsque ",
    "Il est possible que plusieurs causes expliquent que ",
    "Il est fréquent que ",
    "Plusieurs facteurs peuvent expliquer que ",
};

constexpr std::array<std::string_view, 10> kMachineSubjects{
    "Une utilisation prolongée", "Un mauvais réglage", "Une mise à jour récente", "Un défaut de fabrication",
    "L'usure normale", "Un changement de saison", "Un manque d'entretien", "Une mauvaise installation",
    "La qualité du matériel", "Un paramètre incorrect",
};

constexpr std::array<std::string_view, 8> kMachineVerbs{
    " pourrait entraîner des perturbations concernant ", " pourrait avoir un impact sur ",
    " peut parfois affecter ", " pourrait expliquer les difficultés liées à ",
    " peut également influencer ", " serait susceptible de modifier ",
    " pourrait provoquer une baisse de performance de ", " peut jouer un rôle important pour ",
};

constexpr std::array<std::string_view, 8> kMachineAdvice{
    "Il est recommandé de ",
    "Je vous recommande de ",
    "Il est conseillé de ",
    "Il serait judicieux de ",
    "Il est essentiel de ",
    "N'hésitez pas à ",
    "Vous pourriez également ",
    "Dans ce cas, il est préférable de ",
};

constexpr std::array<std::string_view, 7> kMachineClosers{
    "En résumé, il est important de rester attentif aux signes avant-coureurs.",
    "En conclusion, une approche méthodique permettra généralement de résoudre ce problème.",
    "J'espère que cela vous aidera à mieux comprendre la situation.",
    "En général, ces mesures devraient permettre d'améliorer la situation.",
    "Si le problème persiste, il serait préférable de consulter un professionnel qualifié.",
    "Chaque situation étant différente, il convient d'adapter ces conseils.",
    "Il est donc essentiel de bien identifier la cause avant d'agir.",
};

constexpr std::array<std::string_view, 10> kHumanOpeners{
    "perso ", "bah ", "franchement ", "moi ", "alors ", "ouais ", "euh ", "mdr ", "jsais pas mais ", "en vrai ",
};

constexpr std::array<std::string_view, 10> kHumanBodies{
    "j'ai eu le meme souci avec ",
    "je pense que c'est ",
    "chez moi c'etait ",
    "t'as essayé de regarder ",
    "mon frere a eu pareil avec ",
    "ca m'est arrivé aussi avec ",
    "faut voir avec ",
    "j'ai jamais compris ",
    "le mec du magasin m'a dit que c'etait ",
    "j'avoue que j'en sais rien pour ",
};

constexpr std::array<std::string_view, 10> kHumanTails{
    " et depuis ca marche nickel",
    " lol",
    " , bref bon courage",
    " mais bon c'est chiant",
    " !!",
    " ... enfin je crois",
    " jte conseille de pas trop t'inquieter",
    " , ca coute une blinde",
    " mdr",
    " :)",
};

std::string strip_accents(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, char>, 8> kMap{{
      {"é", 'e'}, {"è", 'e'}, {"ê", 'e'}, {"à", 'a'}, {"â", 'a'}, {"ç", 'c'}, {"ô", 'o'}, {"î", 'i'},
  }};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool hit = false;
    for (const auto& [from, to] : kMap)
      if (s.substr(i, from.size()) == from) {
        out += to;
        i += from.size();
        hit = true;
        break;
      }
    if (!hit) out += s[i++];
  }
  return out;
}

// Colloquial noise: dropped accents, stretched letters, doubled spaces.
std::string roughen(SplitMix64& rng, std::string s) {
  if (rng.uniform() < 0.6) s = strip_accents(s);
  std::string out;
  for (char c : s) {
    out += c;
    if (c >= 'a' && c <= 'z' && rng.uniform() < 0.015) out.append(2, c);
    if (c == ' ' && rng.uniform() < 0.03) out += ' ';
  }
  return out;
}

}  // namespace

std::size_t topic_count() { return kTopics.size(); }

std::string question(SplitMix64& rng, std::size_t topic) {
  const Topic& t = kTopics[topic % kTopics.size()];
  static constexpr std::array<std::string_view, 4> kForms{"Pourquoi ", "Comment se fait-il que ",
                                                          "Est-ce normal que ", "Que faire quand "};
  return std::string(pick(rng, kForms)) + std::string(t.problem) + " ?";
}

std::string machine_text(SplitMix64& rng, std::size_t topic) {
  const Topic& t = kTopics[topic % kTopics.size()];
  if (rng.uniform() < 0.35) {
    // Short answer: one cause and one piece of advice.
    std::string s = std::string(pick(rng, kMachineSubjects)) + std::string(pick(rng, kMachineVerbs)) +
                    std::string(rng.uniform() < 0.5 ? t.thing : t.subject) + ". ";
    return s + std::string(pick(rng, kMachineAdvice)) + std::string(t.action) + ".";
  }
  std::string s(pick(rng, kMachineOpeners));
  s += std::string(t.problem) + ".";
  const std::size_t n = 2 + rng.below(3);
  const int layout = static_cast<int>(rng.below(3));  // numbered, dashes, prose
  if (layout < 2) s += " Voici quelques pistes :\n";
  for (std::size_t i = 0; i < n; ++i) {
    std::string line = std::string(pick(rng, kMachineSubjects)) + std::string(pick(rng, kMachineVerbs)) +
                       std::string(rng.uniform() < 0.5 ? t.thing : t.subject) + ".";
    if (layout == 0) s += std::to_string(i + 1) + ". " + line + "\n";
    else if (layout == 1) s += "- " + line + "\n";
    else s += " " + line;
  }
  s += layout < 2 ? "" : " ";
  s += std::string(pick(rng, kMachineAdvice)) + std::string(t.action) + ".";
  if (rng.uniform() < 0.7) {
    s += " ";
    s += pick(rng, kMachineClosers);
  }
  return s;
}

std::string human_text(SplitMix64& rng, std::size_t topic) {
  const Topic& t = kTopics[topic % kTopics.size()];
  std::string s(pick(rng, kHumanOpeners));
  s += pick(rng, kHumanBodies);
  s += rng.uniform() < 0.5 ? std::string(t.thing) : std::string(t.subject);
  if (rng.uniform() < 0.5) s += ", j'ai fini par " + std::string(t.action);
  s += pick(rng, kHumanTails);
  // Same causes as the machine answers, told in the first person.
  const std::size_t n = rng.below(3);
  for (std::size_t i = 0; i < n; ++i) {
    std::string cause(pick(rng, kMachineSubjects));
    cause[0] = static_cast<char>(cause[0] - 'A' + 'a');
    s += ". " + std::string(pick(rng, kHumanOpeners)) + "chez moi c'etait " + cause + " sur " +
         std::string(rng.uniform() < 0.5 ? t.thing : t.subject);
  }
  if (rng.uniform() < 0.3) s += ". le pire c'est que " + std::string(t.problem);
  if (rng.uniform() < 0.15) s += " , ce que j'ai fait :\n- " + std::string(t.action) + "\n- attendre un peu\n";
  return roughen(rng, s);
}

std::string adversarial_text(SplitMix64& rng, std::size_t topic) {
  const Topic& t = kTopics[topic % kTopics.size()];
  std::string s = "Il y a plusieurs choses à savoir quand " + std::string(t.problem) + ". ";
  s += "Premièrement, je pense qu'il faut regarder " + std::string(t.thing) + ". ";
  s += "Ensuite, " + std::string(t.action) + " peut aider. ";
  if (rng.uniform() < 0.5) s += "Personnellement, c'est ce qui a marché chez moi.";
  else s += "À mon avis, il vaut mieux ne pas attendre.";
  return s;
}

std::string news_text(SplitMix64& rng, std::size_t topic) {
  const Topic& t = kTopics[topic % kTopics.size()];
  static constexpr std::array<std::string_view, 4> kLeads{
      "Selon plusieurs témoignages recueillis mardi, ", "D'après une enquête publiée cette semaine, ",
      "Interrogés par notre rédaction, des habitants affirment que ", "Au cours des derniers mois, "};
  std::string s(pick(rng, kLeads));
  s += std::string(t.problem) + " dans de nombreux foyers de la région. ";
  s += capitalize(std::string(t.subject)) + " reste au coeur des préoccupations, note un responsable local.";
  return s;
}

std::vector<mgtd::ExampleUnit> units(std::size_t n_machine, std::size_t n_human, std::uint64_t seed) {
  std::vector<mgtd::ExampleUnit> out;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n_machine + n_human; ++i) {
    mgtd::ExampleUnit u;
    const std::size_t topic = rng.below(kTopics.size());
    u.label = i < n_machine ? mgtd::Label::Machine : mgtd::Label::Human;
    u.text = u.label == mgtd::Label::Machine ? machine_text(rng, topic) : human_text(rng, topic);
    u.record_id = "u" + std::to_string(i);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<mgtd::Record> records(std::size_t n, std::uint64_t seed) {
  std::vector<mgtd::Record> out;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    mgtd::Record r;
    const std::size_t topic = rng.below(kTopics.size());
    r.id = "syn-" + std::to_string(i);
    r.question = question(rng, topic);
    r.human_answers.push_back(human_text(rng, topic));
    r.machine_answers.push_back(machine_text(rng, topic));
    r.translation_quality = 1 + static_cast<int>(rng.below(5));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<mgtd::Record> out_of_domain(std::size_t per_tag, std::uint64_t seed) {
  std::vector<mgtd::Record> out;
  SplitMix64 rng(seed);
  for (const char* tag : {"ftb", "adversarial", "bing"}) {
    for (std::size_t i = 0; i < per_tag; ++i) {
      mgtd::Record r;
      const std::size_t topic = rng.below(kTopics.size());
      r.id = std::string(tag) + "-" + std::to_string(i);
      r.source_tag = tag;
      const std::string_view t(tag);
      if (t == "ftb") r.human_answers.push_back(news_text(rng, topic));
      else if (t == "adversarial") r.human_answers.push_back(adversarial_text(rng, topic));
      else r.machine_answers.push_back(machine_text(rng, topic));
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace synthetic
