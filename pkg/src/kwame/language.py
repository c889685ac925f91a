"""Self-contained English/French detection for incoming questions.

Each language ships a profile of character-trigram log frequencies built
from bundled course-style text plus a stopword list. A question is scored
against both profiles (trigram log-likelihood plus a bonus per stopword
hit) and routed to the argmax. No external detection library, so behaviour
is deterministic and testable offline.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

_LETTERS_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

# Per-stopword score bonus and margin scale, frozen after the calibration
# run recorded in tests/data/language_calibration.json.
STOPWORD_BONUS = 3.0
_MARGIN_SCALE = 1.0

_EN_SEED_TEXT = """
In this lesson you will learn the basic concepts needed to write your first
program. A program is a list of instructions that the computer follows one
after the other, from the top of the file to the bottom.

To draw a circle on the screen you call the ellipse function and give it a
position and a size. The first two numbers say where the center of the
circle should be and the last two numbers say how wide and how tall it is.

The setup function runs once when the sketch starts. It is the right place
to set the size of the window and the background color. The draw function
runs again and again, many times every second, and everything you draw in
it appears on the screen.

A variable is a name for a value that can change while the program runs.
You declare a variable by writing its type, its name, and the value you
want it to start with. If you use a variable before declaring it, the
computer will complain that it does not exist.

Colors are made of three numbers for red, green and blue. Each number goes
from zero to two hundred and fifty five. White is all three at the maximum
and black is all three at zero.

When something goes wrong, read the error message carefully. It usually
tells you the line where the problem happened and what the computer was
expecting to find there. Check your spelling, check that every opening
bracket has a closing one, and check that each statement ends correctly.

You can ask questions about anything in the lesson, for example how to
move a shape, why the screen stays black, what the numbers in a function
mean, or where a variable should be declared. Should you get stuck, try a
small change first and run the program again to see what happens. Does the
result look right? Is there an easier way to say the same thing? These are
good habits for every new programmer.
"""

_FR_SEED_TEXT = """
Dans cette leçon vous allez apprendre les notions de base nécessaires pour
écrire votre premier programme. Un programme est une liste d'instructions
que l'ordinateur suit l'une après l'autre, du haut du fichier jusqu'en bas.

Pour dessiner un cercle sur l'écran, vous appelez la fonction ellipse en
lui donnant une position et une taille. Les deux premiers nombres disent
où doit se trouver le centre du cercle et les deux derniers indiquent sa
largeur et sa hauteur.

La fonction setup s'exécute une seule fois quand le programme démarre.
C'est le bon endroit pour définir la taille de la fenêtre et la couleur du
fond. La fonction draw s'exécute encore et encore, plusieurs fois par
seconde, et tout ce que vous y dessinez apparaît à l'écran.

Une variable est un nom pour une valeur qui peut changer pendant que le
programme tourne. On déclare une variable en écrivant son type, son nom et
la valeur de départ. Si vous utilisez une variable avant de la déclarer,
l'ordinateur se plaint qu'elle n'existe pas.

Les couleurs sont faites de trois nombres pour le rouge, le vert et le
bleu. Chaque nombre va de zéro à deux cent cinquante cinq. Le blanc est
les trois au maximum et le noir est les trois à zéro.

Quand quelque chose ne marche pas, lisez attentivement le message
d'erreur. Il indique en général la ligne où le problème est apparu et ce
que l'ordinateur attendait à cet endroit. Vérifiez l'orthographe, vérifiez
que chaque parenthèse ouverte est bien refermée, et que chaque instruction
se termine correctement.

Vous pouvez poser des questions sur tout ce qui se trouve dans la leçon,
par exemple comment déplacer une forme, pourquoi l'écran reste noir, ce
que veulent dire les nombres dans une fonction, ou bien où il faut
déclarer une variable. Si vous êtes bloqué, essayez d'abord un petit
changement puis relancez le programme pour voir ce qui se passe. Est-ce
que le résultat vous semble juste ? Y a-t-il une façon plus simple de dire
la même chose ? Ce sont de bonnes habitudes pour tout nouveau programmeur.
"""

_EN_STOPWORDS = frozenset(
    """
    the a an is are was were be been to of in on at it its this that these
    those and or not no do does did done how what why when where which who
    can could should would will shall may might must i you he she we they
    my your his her our their me him them with for from by as if then than
    there here have has had having about into over under again more most
    some such only own same so too very just
    """.split()
)

_FR_STOPWORDS = frozenset(
    """
    le la les un une des de du au aux est sont était être été et ou où ne
    pas plus que qui quoi dont comment pourquoi quand quel quelle quels
    quelles peut peux pouvez faut je tu il elle on nous vous ils elles mon
    ma mes ton ta tes son sa ses notre votre leur avec pour par dans sur
    sous si alors donc mais comme entre après avant chez vers sans cette ce
    cet ces ça cela y en à très aussi bien tout toute tous toutes même
    """.split()
)


@dataclass
class LanguageProfile:
    lang: str
    trigram_weights: dict[str, float]
    floor: float
    stopwords: frozenset[str]


def _letter_tokens(text: str) -> list[str]:
    return _LETTERS_RE.findall(text.lower())


def _trigrams(tokens: list[str]) -> list[str]:
    grams: list[str] = []
    for token in tokens:
        padded = f" {token} "
        grams.extend(padded[i : i + 3] for i in range(len(padded) - 2))
    return grams


def _build_profiles() -> dict[str, LanguageProfile]:
    seeds = {"en": (_EN_SEED_TEXT, _EN_STOPWORDS), "fr": (_FR_SEED_TEXT, _FR_STOPWORDS)}
    counts = {
        lang: Counter(_trigrams(_letter_tokens(text) + sorted(stops)))
        for lang, (text, stops) in seeds.items()
    }
    # Smooth over the union vocabulary so floors are comparable across profiles.
    vocab_size = len(set().union(*counts.values())) + 1
    alpha = 0.5
    profiles = {}
    for lang, (_, stops) in seeds.items():
        total = sum(counts[lang].values())
        denom = total + alpha * vocab_size
        weights = {t: math.log((c + alpha) / denom) for t, c in counts[lang].items()}
        profiles[lang] = LanguageProfile(
            lang=lang,
            trigram_weights=weights,
            floor=math.log(alpha / denom),
            stopwords=stops,
        )
    return profiles


PROFILES: dict[str, LanguageProfile] = _build_profiles()


def profile_score(text: str, profile: LanguageProfile) -> float:
    """Trigram log-likelihood plus a fixed bonus per stopword hit."""
    tokens = _letter_tokens(text)
    score = sum(
        profile.trigram_weights.get(t, profile.floor) for t in _trigrams(tokens)
    )
    score += STOPWORD_BONUS * sum(1 for tok in tokens if tok in profile.stopwords)
    return score


def detect_language(text: str) -> tuple[str, float]:
    """Return (language, confidence in [0, 1]).

    Confidence is the per-trigram score margin between the best and the
    runner-up profile, squashed into [0, 1). Undecidable input (shorter
    than 3 characters, no letters, or an exact tie) defaults to English
    with confidence 0.
    """
    if text is None or len(text.strip()) < 3:
        return "en", 0.0
    tokens = _letter_tokens(text)
    n_trigrams = len(_trigrams(tokens))
    if n_trigrams == 0:
        return "en", 0.0

    scored = sorted(
        ((profile_score(text, p), lang) for lang, p in PROFILES.items()),
        key=lambda pair: (-pair[0], pair[1]),
    )
    (best_score, best_lang), (second_score, _) = scored[0], scored[1]
    if best_score == second_score:
        return "en", 0.0
    margin = (best_score - second_score) / n_trigrams
    confidence = margin / (margin + _MARGIN_SCALE)
    return best_lang, confidence
