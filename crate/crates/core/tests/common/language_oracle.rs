//! Reference language identification through an established trigram detector.

/// ISO 639-1 code of whatlang's guess, for the languages the detector covers.
pub fn reference_language(text: &str) -> Option<&'static str> {
    use whatlang::Lang::*;
    let info = whatlang::detect(text)?;
    Some(match info.lang() {
        Eng => "en",
        Nld => "nl",
        Deu => "de",
        Fra => "fr",
        Spa => "es",
        Ita => "it",
        Por => "pt",
        Pol => "pl",
        Ces => "cs",
        Hun => "hu",
        Ron => "ro",
        Swe => "sv",
        Ell => "el",
        _ => return None,
    })
}

/// Typical notice sentences, one or more per covered language.
pub const NOTICE_TEXTS: [&str; 18] = [
    "this website uses cookies to improve your experience",
    "We use cookies to give you the best experience on our website. By continuing you agree to our use of cookies.",
    "deze website gebruikt cookies om u de beste ervaring te geven",
    "Wij gebruiken cookies om de website goed te laten werken en om het gebruik van de site te analyseren.",
    "Diese Website verwendet Cookies, um Ihnen das beste Erlebnis zu bieten. Wenn Sie die Seite weiter nutzen, stimmen Sie der Verwendung zu.",
    "Ce site utilise des cookies pour vous offrir la meilleure expérience. En poursuivant votre navigation, vous acceptez leur utilisation.",
    "Este sitio web utiliza cookies para mejorar su experiencia. Si continúa navegando, acepta el uso de las cookies.",
    "Questo sito utilizza i cookie per migliorare la tua esperienza. Continuando la navigazione accetti il loro utilizzo.",
    "Este site utiliza cookies para melhorar a sua experiência. Ao continuar a navegar, concorda com a sua utilização.",
    "Ta strona używa plików cookies w celu świadczenia usług na najwyższym poziomie. Dalsze korzystanie ze strony oznacza, że zgadzasz się na ich użycie.",
    "Tyto webové stránky používají soubory cookies. Pokračováním v prohlížení souhlasíte s jejich používáním.",
    "Ez a weboldal sütiket használ a jobb felhasználói élmény érdekében. A weboldal további használatával hozzájárul a sütik használatához.",
    "Acest site folosește cookie-uri pentru a vă oferi o experiență mai bună. Continuarea navigării implică acceptarea lor.",
    "Den här webbplatsen använder kakor för att ge dig en bättre upplevelse. Genom att fortsätta godkänner du att vi använder kakor.",
    "Αυτός ο ιστότοπος χρησιμοποιεί cookies για να βελτιώσει την εμπειρία σας. Συνεχίζοντας την περιήγηση αποδέχεστε τη χρήση τους.",
    "Wir verwenden Cookies, um Inhalte zu personalisieren und die Zugriffe auf unsere Website zu analysieren.",
    "Nous utilisons des cookies afin de vous proposer des contenus et des services adaptés à vos centres d'intérêts.",
    "Utilizamos cookies propias y de terceros para mejorar nuestros servicios y mostrarle publicidad relacionada con sus preferencias.",
];
