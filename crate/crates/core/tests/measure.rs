use chrono::{Duration, TimeZone, Utc};
use noticescope::domquery::{BannerMatch, NodeId};
use noticescope::harvest::CookieRecord;
use noticescope::noticemetrics::{
    consolidate, count_links, count_third_party_persistent, count_words, detect_language,
    registrable_domain, strip_tags,
};

fn m(id: u32, height: Option<u32>, html: &str) -> BannerMatch {
    BannerMatch {
        node_id: NodeId(id),
        selector_text: "#cookieNotice".into(),
        height_px: height,
        width_px: None,
        offset_x: None,
        offset_y: None,
        inner_html: html.into(),
        has_hidden_ancestor_hint: false,
    }
}

fn words(n: usize) -> String {
    vec!["cookie"; n].join(" ")
}

#[test]
fn tallest_height_and_longest_text() {
    let ms = [
        m(1, Some(40), &words(5)),
        m(2, Some(120), &words(31)),
        m(3, Some(80), &words(10)),
    ];
    let c = consolidate(&ms);
    assert_eq!(
        (c.height_px, c.word_count, c.match_count),
        (Some(120), Some(31), 3)
    );
}

#[test]
fn maxima_come_from_different_matches() {
    let tall = m(1, Some(300), "<p>Cookies <a href=\"/p\">policy</a></p>");
    let long = m(
        2,
        Some(60),
        "<p>We use cookies for analytics and advertising on this site.</p><button>Accept</button><button>Refuse</button><a href=\"/p\">More</a>",
    );
    let c = consolidate(&[tall, long]);
    assert_eq!(c.height_px, Some(300));
    assert_eq!(c.word_count, Some(13));
    assert_eq!(c.link_count, Some(3));
}

#[test]
fn no_matches_is_all_unknown() {
    let c = consolidate(&[]);
    assert_eq!(
        (c.height_px, c.word_count, c.link_count, c.match_count),
        (None, None, None, 0)
    );
}

#[test]
fn link_counting() {
    assert_eq!(count_links("<a href=\"/x\">x</a><button>OK</button>"), 2);
    assert_eq!(count_links("<a href=\"#\"><span>ok</span></a>"), 1);
    assert_eq!(
        count_links(
            "<p>We use cookies. <a href=\"/cookie-policy\">Cookie policy</a></p>\
             <button class=\"accept\">Accept</button><button class=\"refuse\">Refuse</button>"
        ),
        3
    );
    assert_eq!(
        count_links("<div role=\"button\">OK</div><input type=\"submit\" value=\"OK\">"),
        2
    );
    assert_eq!(
        count_links("<button role=\"button\">once</button><a>no href</a>"),
        1
    );
}

/// Notice markup in the shape of archived banners, with hand-counted words.
const BANNERS: [(&str, u32); 10] = [
    ("<p>This website uses cookies</p>", 4),
    ("<p>We use cookies to ensure that we give you the best experience on our website.</p><a href=\"/privacy\">Privacy policy</a> <button>OK</button>", 18),
    ("<div class=\"cc-message\">Deze website maakt gebruik van cookies.</div><a class=\"cc-btn\" href=\"#\">Akkoord</a>", 7),
    ("<span>Diese Website verwendet Cookies. Mit der Nutzung stimmen Sie zu.</span> <a href=\"/datenschutz\">Mehr&nbsp;erfahren</a>", 12),
    ("<p>En poursuivant votre navigation, vous acceptez l&#39;utilisation de cookies.</p><button>J&apos;accepte</button>", 10),
    ("<h3>Cookies</h3><p>Utilizamos cookies propias y de terceros.</p><button>Aceptar</button><button>Rechazar</button>", 9),
    ("<p>By clicking &quot;Accept&quot; you agree to the storing of cookies &amp; similar technologies.</p>", 13),
    ("<div><strong>Cookie</strong>s help us deliver our services.</div>", 6),
    ("<p>Questo sito utilizza cookie.<br>Leggi l&#x27;informativa</p>", 6),
    ("<ul><li>Necessary</li><li>Statistics</li><li>Marketing</li></ul><button>Save</button>", 4),
];

#[test]
fn banner_word_counts_match_hand_counts() {
    for (html, expected) in BANNERS {
        assert_eq!(count_words(&strip_tags(html)), expected, "{html}");
    }
}

#[test]
fn word_count_examples() {
    assert_eq!(count_words("This website uses cookies"), 4);
    assert_eq!(count_words(""), 0);
    assert_eq!(count_words("  \t\n "), 0);
}

#[test]
fn language_examples() {
    assert_eq!(detect_language(""), "und");
    assert_eq!(
        detect_language("deze website gebruikt cookies om u de beste ervaring te geven"),
        "nl"
    );
    assert_eq!(
        detect_language("this website uses cookies to improve your experience"),
        "en"
    );
    assert_eq!(detect_language("cookies cookies"), "und");
}

#[test]
fn registrable_domain_examples() {
    assert_eq!(registrable_domain("sub.example.com"), "example.com");
    assert_eq!(registrable_domain("example.com"), "example.com");
    assert_eq!(registrable_domain("www.google.co.uk"), "google.co.uk");
    assert_eq!(
        registrable_domain("sync.adnet-metrics.example"),
        "adnet-metrics.example"
    );
}

fn cookie(name: &str, domain: &str, expires: Option<chrono::DateTime<Utc>>) -> CookieRecord {
    CookieRecord {
        name: name.into(),
        cookie_domain: domain.into(),
        path: "/".into(),
        expires,
        set_by_url: format!("http://{domain}/"),
    }
}

#[test]
fn third_party_persistent_counting() {
    let now = Utc.with_ymd_and_hms(2018, 12, 1, 12, 0, 0).unwrap();
    let later = Some(now + Duration::days(365));
    let earlier = Some(now - Duration::days(1));
    assert_eq!(
        count_third_party_persistent(&[cookie("s", "www.site.nl", None)], "site.nl", now),
        0
    );
    assert_eq!(
        count_third_party_persistent(&[cookie("t", "tracker.example", later)], "site.nl", now),
        1
    );
    let mixed = [
        cookie("session", "site.nl", None),
        cookie("sync", "sync.tracker.example", None),
        cookie("pref", "www.site.nl", later),
        cookie("uid", "tracker.example", later),
        cookie("id", "ads.adnet.com", later),
        cookie("_ga", "analytics.co.uk", later),
    ];
    assert_eq!(count_third_party_persistent(&mixed, "site.nl", now), 3);
    assert_eq!(
        count_third_party_persistent(&[cookie("old", "tracker.example", earlier)], "site.nl", now),
        0
    );
}
