//! Stopword-frequency language identification for short banner texts.

/// ISO 639-1 code returned when no language is confidently detected.
pub const UNDETERMINED: &str = "und";

/// Languages of the fifteen EU vantage countries plus English, in tie-break order.
pub const STOPWORDS: &[(&str, &[&str])] = &[
    (
        "en",
        &[
            "the",
            "and",
            "to",
            "of",
            "you",
            "your",
            "we",
            "our",
            "this",
            "that",
            "is",
            "are",
            "for",
            "with",
            "use",
            "uses",
            "by",
            "on",
            "it",
            "be",
            "can",
            "more",
            "about",
            "how",
            "information",
            "continue",
            "continuing",
            "agree",
            "accept",
            "experience",
            "improve",
            "browsing",
            "policy",
            "find",
            "out",
            "you're",
            "using",
            "site",
            "these",
            "learn",
        ],
    ),
    (
        "nl",
        &[
            "de",
            "het",
            "een",
            "en",
            "van",
            "je",
            "jij",
            "u",
            "uw",
            "wij",
            "we",
            "onze",
            "deze",
            "dit",
            "om",
            "te",
            "op",
            "voor",
            "met",
            "zijn",
            "wordt",
            "worden",
            "gebruikt",
            "gebruiken",
            "ervaring",
            "meer",
            "informatie",
            "akkoord",
            "ga",
            "geven",
            "bij",
            "niet",
            "ook",
            "door",
            "naar",
            "lees",
            "accepteren",
            "beste",
            "onder",
            "cookiebeleid",
        ],
    ),
    (
        "de",
        &[
            "der",
            "die",
            "das",
            "und",
            "zu",
            "den",
            "dem",
            "sie",
            "ihr",
            "ihre",
            "ihnen",
            "wir",
            "unsere",
            "diese",
            "dieser",
            "ist",
            "sind",
            "von",
            "mit",
            "auf",
            "für",
            "nicht",
            "auch",
            "werden",
            "wird",
            "verwendet",
            "verwenden",
            "nutzung",
            "einverstanden",
            "mehr",
            "erfahren",
            "damit",
            "können",
            "durch",
            "weitere",
            "informationen",
            "sich",
            "zur",
            "datenschutzerklärung",
            "akzeptieren",
        ],
    ),
    (
        "fr",
        &[
            "le",
            "la",
            "les",
            "des",
            "et",
            "vous",
            "votre",
            "vos",
            "nous",
            "notre",
            "nos",
            "ce",
            "cette",
            "ces",
            "est",
            "sont",
            "pour",
            "sur",
            "avec",
            "dans",
            "une",
            "un",
            "du",
            "en",
            "utilise",
            "utilisons",
            "utilisation",
            "acceptez",
            "accepter",
            "savoir",
            "plus",
            "expérience",
            "navigation",
            "poursuivant",
            "site",
            "qui",
            "afin",
            "leur",
            "être",
            "en savoir",
        ],
    ),
    (
        "es",
        &[
            "el",
            "la",
            "los",
            "las",
            "y",
            "de",
            "del",
            "que",
            "en",
            "un",
            "una",
            "para",
            "con",
            "por",
            "su",
            "sus",
            "nuestra",
            "nuestro",
            "este",
            "esta",
            "es",
            "se",
            "utiliza",
            "utilizamos",
            "usamos",
            "aceptar",
            "acepta",
            "navegación",
            "navegando",
            "más",
            "información",
            "experiencia",
            "mejorar",
            "consideramos",
            "uso",
            "política",
            "sitio",
            "web",
            "continúa",
            "ofrecerle",
        ],
    ),
    (
        "it",
        &[
            "il",
            "lo",
            "la",
            "gli",
            "le",
            "di",
            "del",
            "della",
            "dei",
            "e",
            "che",
            "per",
            "con",
            "un",
            "una",
            "questo",
            "questa",
            "sito",
            "utilizza",
            "utilizziamo",
            "uso",
            "tuo",
            "tua",
            "nostro",
            "nostri",
            "sono",
            "è",
            "si",
            "al",
            "alla",
            "navigazione",
            "proseguendo",
            "acconsenti",
            "accetta",
            "maggiori",
            "informazioni",
            "esperienza",
            "migliore",
            "consenso",
            "servizi",
        ],
    ),
    (
        "pt",
        &[
            "o",
            "os",
            "a",
            "as",
            "e",
            "de",
            "do",
            "da",
            "dos",
            "das",
            "que",
            "em",
            "um",
            "uma",
            "para",
            "com",
            "por",
            "seu",
            "sua",
            "nosso",
            "nossa",
            "este",
            "esta",
            "é",
            "são",
            "utiliza",
            "utilizamos",
            "usamos",
            "aceitar",
            "aceita",
            "navegação",
            "mais",
            "informações",
            "experiência",
            "melhorar",
            "continuar",
            "você",
            "ao",
            "política",
            "utilização",
        ],
    ),
    (
        "pl",
        &[
            "i",
            "w",
            "z",
            "na",
            "do",
            "się",
            "nie",
            "jest",
            "to",
            "że",
            "o",
            "od",
            "lub",
            "przez",
            "dla",
            "za",
            "ta",
            "ten",
            "strona",
            "stronie",
            "korzysta",
            "używa",
            "używamy",
            "plików",
            "pliki",
            "twoim",
            "urządzeniu",
            "więcej",
            "informacji",
            "zgodę",
            "zgadzam",
            "wyrażasz",
            "akceptuję",
            "polityka",
            "prywatności",
            "usług",
            "celu",
            "można",
            "będą",
            "jakie",
        ],
    ),
    (
        "cs",
        &[
            "a",
            "v",
            "se",
            "na",
            "je",
            "že",
            "s",
            "z",
            "k",
            "o",
            "do",
            "pro",
            "jsou",
            "tento",
            "tato",
            "toto",
            "web",
            "webu",
            "stránky",
            "používá",
            "používáme",
            "soubory",
            "souborů",
            "vašem",
            "vám",
            "váš",
            "více",
            "informací",
            "souhlasím",
            "souhlas",
            "abychom",
            "mohli",
            "služby",
            "zařízení",
            "ukládání",
            "zobrazení",
            "rozumím",
            "jejich",
            "nebo",
            "dalším",
        ],
    ),
    (
        "hu",
        &[
            "a",
            "az",
            "és",
            "hogy",
            "nem",
            "is",
            "egy",
            "ez",
            "ezt",
            "meg",
            "oldal",
            "oldalon",
            "weboldal",
            "sütiket",
            "sütik",
            "süti",
            "használ",
            "használunk",
            "használja",
            "használatával",
            "használatához",
            "további",
            "információ",
            "elfogadom",
            "elfogad",
            "böngészés",
            "hozzájárul",
            "kapcsolatban",
            "adatvédelmi",
            "tájékoztató",
            "vagy",
            "minden",
            "amely",
            "szolgáltatás",
            "jobb",
            "élmény",
            "érdekében",
            "ön",
            "önnek",
            "által",
        ],
    ),
    (
        "ro",
        &[
            "și",
            "si",
            "în",
            "in",
            "de",
            "la",
            "cu",
            "pe",
            "că",
            "ca",
            "un",
            "o",
            "pentru",
            "este",
            "sunt",
            "acest",
            "această",
            "site",
            "site-ul",
            "folosește",
            "folosim",
            "utilizăm",
            "utilizează",
            "mai",
            "multe",
            "informații",
            "acord",
            "accept",
            "navigarea",
            "continuarea",
            "experiența",
            "dumneavoastră",
            "voastră",
            "dvs",
            "sau",
            "ale",
            "politica",
            "fișiere",
            "modulele",
            "despre",
        ],
    ),
    (
        "sv",
        &[
            "och",
            "att",
            "det",
            "som",
            "en",
            "ett",
            "är",
            "för",
            "på",
            "med",
            "av",
            "till",
            "vi",
            "du",
            "din",
            "dina",
            "våra",
            "vår",
            "denna",
            "den",
            "här",
            "webbplats",
            "webbplatsen",
            "använder",
            "användning",
            "kakor",
            "läs",
            "mer",
            "om",
            "godkänner",
            "accepterar",
            "samtycker",
            "upplevelse",
            "bästa",
            "genom",
            "fortsätta",
            "kan",
            "inte",
            "fler",
            "hantera",
        ],
    ),
    (
        "el",
        &[
            "και",
            "το",
            "τα",
            "την",
            "της",
            "τον",
            "του",
            "των",
            "η",
            "ο",
            "οι",
            "να",
            "με",
            "σε",
            "για",
            "από",
            "που",
            "μας",
            "σας",
            "είναι",
            "αυτός",
            "αυτή",
            "αυτό",
            "ιστοσελίδα",
            "ιστότοπος",
            "χρησιμοποιεί",
            "χρησιμοποιούμε",
            "περισσότερα",
            "πληροφορίες",
            "αποδέχομαι",
            "αποδοχή",
            "συμφωνώ",
            "εμπειρία",
            "περιήγηση",
            "πολιτική",
            "απορρήτου",
            "συνεχίζοντας",
            "στην",
            "στο",
            "θα",
        ],
    ),
];

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’' || c == '-'))
        .map(|t| t.trim_matches(|c| c == '\'' || c == '’' || c == '-'))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Highest stopword-hit language, or [`UNDETERMINED`] for fewer than three
/// words or fewer than two hits. Ties go to the earlier entry of [`STOPWORDS`].
pub fn detect_language(text: &str) -> &'static str {
    let words = tokens(text);
    if words.len() < 3 {
        return UNDETERMINED;
    }
    let mut best = (UNDETERMINED, 0usize);
    for (code, list) in STOPWORDS {
        let hits = words.iter().filter(|w| list.contains(&w.as_str())).count();
        if hits > best.1 {
            best = (code, hits);
        }
    }
    if best.1 < 2 {
        UNDETERMINED
    } else {
        best.0
    }
}
