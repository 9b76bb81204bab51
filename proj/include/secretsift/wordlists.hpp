#pragma once
// Built-in lexicons. The same contents ship as data files (data/) so
// deployments can override them; tests assert the two stay in sync.

#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace secretsift {

/// Parses a one-entry-per-line word file ('#' comments allowed). Entries are
/// lowercased. Whitespace-separated words on one line are also accepted.
inline std::set<std::string> parse_word_list(std::string_view text) {
    std::set<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        std::istringstream fields(line);
        std::string w;
        while (fields >> w) {
            for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            out.insert(w);
        }
    }
    return out;
}

/// Placeholder tokens that mark example values rather than live credentials.
inline const std::set<std::string>& default_placeholder_lexicon() {
    static const std::set<std::string> lexicon = {
        "username", "password", "passwd", "pass", "user", "host", "server", "example",
        "sample", "token", "secret", "changeme", "placeholder", "your", "insert", "dummy", "test",
    };
    return lexicon;
}

namespace detail {
inline constexpr std::string_view kReadabilityWords =
    "a ability able about above accept access account across act action active actual add\n"
    "address admin administrator after afterwards again against age agent ago agree air all\n"
    "allow almost alone along already also although always am among amongst amoungst amount\n"
    "an analysis and angle animal announce annual another answer any anyhow anyone anything\n"
    "anyway anywhere api app appear apple application apply approach april are area argue\n"
    "argument arm around array arrive art article as ask assert assign assume at attach\n"
    "attack attempt august author auto available average avoid away back backup bad balance\n"
    "ball bank bar base basic batch battery be beach bear beat beautiful became because\n"
    "become becomes becoming bed been before beforehand begin behavior behind being believe\n"
    "bell below benefit beside besides best better between beyond big bill bind bird bit\n"
    "black block blood blue board boat body book boolean boot both bottle bottom box boy\n"
    "brain branch bread break bridge brief bring broad brother browser budget buffer bug\n"
    "build builder building bus business busy but button buy by byte cache cake call camera\n"
    "camp can cancel candidate cannot cant capital captain capture car card care career\n"
    "careful carry case cash cat catch category cause cell center central century certain\n"
    "chain chair challenge chance change channel chapter character charge chart cheap check\n"
    "checkout child choice choose church circle citizen city civil claim class classic clean\n"
    "clear click client climb clock clone close cloud club cluster co coach coast code coffee\n"
    "cold collect collection college color column combine come command comment commit common\n"
    "community company compare compile complete computer con concern condition conference\n"
    "config configuration confirm connect connection consider console constant contain\n"
    "container content contest context continue contract control convert cookie cool copy\n"
    "core corner correct cost could couldnt count counter country couple course court cover\n"
    "crash create credential credit crime critical cross crowd cry culture cup current custom\n"
    "customer cut cycle daemon daily damage dance danger dark dashboard data database date\n"
    "daughter day de dead deal debate debug december decide decision deck declare deep\n"
    "default defense define degree delay delete deliver demand demo deny department depend\n"
    "deploy deployment depth describe design desk detail detect develop developer development\n"
    "device dictionary die difference different difficult digital dinner direction directory\n"
    "disable discover discuss disk display distance district divide do doctor document dog\n"
    "dollar domain done door double down download draft draw dream drive driver drop drug due\n"
    "during duty each early earn earth east easy eat economy edge edit editor education\n"
    "effect effort eg eight either electric element eleven else elsewhere email embed\n"
    "emergency employee empty enable encode end endpoint enemy energy engine engineer enjoy\n"
    "enough ensure enter entire entity entry environment equal error escape especially\n"
    "establish estimate etc evaluate even evening event ever every everyone everything\n"
    "everywhere evidence exact examine example excel except exchange execute exist exit\n"
    "expand expect experience expert expire explain export express extend extension extra eye\n"
    "face fact factor factory fail failure fall false family famous fast father fault feature\n"
    "february federal feed feel female fetch few field fifteen fifty fight figure file fill\n"
    "filter final finally financial find fine finger finish fire firm first fish fit five fix\n"
    "flag floor flow fly focus folder follow food foot for force foreign forest forget form\n"
    "format former formerly forty forward found four frame free friend from front fruit full\n"
    "fun function fund further future game garden gas gate gather general generate get gift\n"
    "girl give glass global go goal gold good government grant graph great green ground group\n"
    "grow growth guard guess guest guide gun guy had hair half hall hand handle hang happen\n"
    "happy hard has hash hasnt have he head health hear heart heat heavy hello help hence her\n"
    "here hereafter hereby herein hereupon hero hers herself high him himself his history hit\n"
    "hold hole home hook hope horse hospital host hot hotel hour house how however http https\n"
    "huge human hundred husband i idea identify identity ie if image imagine impact import\n"
    "important improve in inc include income increase indeed index indicate individual\n"
    "industry info information init initial input insert inside install instance instead\n"
    "integer interest interface internal international internet interview into invalid invoke\n"
    "involve is issue it item its itself january job join joint journal judge july jump june\n"
    "just keep key keyboard kid kill kind king kitchen know knowledge label land language\n"
    "laptop large last late later latter latterly laugh launch law lawyer lead leader learn\n"
    "least leave left leg legal length less lesson let letter level library license lie life\n"
    "light like likely limit line link list listen little live load loader local localhost\n"
    "locate location lock log logging logic login long look loop lose loss lost lot love low\n"
    "ltd machine made magazine mail main maintain major make male manage management manager\n"
    "manifest manual many map march mark market marriage master match material matrix matter\n"
    "may maybe mayor me mean meanwhile measure media medical meet meeting member memory\n"
    "mention menu merge message metal method middle might military mill million mind mine\n"
    "minute mirror miss mission mock mode model modern modify module moment money monitor\n"
    "month more moreover morning most mostly mother mount mouse mouth move movement movie\n"
    "much multiple murder muscle music must my myself name namely nation national native\n"
    "natural near nearly necessary neck need neither network never nevertheless new news next\n"
    "nice night nine no nobody node none noone nor north not note nothing notice november now\n"
    "nowhere null number object observe occur ocean october of off offer office officer\n"
    "official often oil okay old on once one only onto open operation opportunity option or\n"
    "orange order organization origin original other others otherwise our ours ourselves out\n"
    "output outside over own owner pack package page pain paint pair panel paper parameter\n"
    "parent park parse part particular partner party pass passwd password past patch path\n"
    "patient pattern pause pay payload payment peace people per perform performance perhaps\n"
    "period permission person phase phone physical pick picture piece pipe pipeline place\n"
    "plan plane planet plant platform play player please plugin point police policy politics\n"
    "pool poor popular population port portal position positive possible post pound power\n"
    "practice prepare present president press pretty prevent price primary print printer\n"
    "priority private probably problem procedure process produce product production\n"
    "professional professor profile program project promise prompt proof property protect\n"
    "protocol prove provide provider public publish pull purpose push put quality query\n"
    "question queue quick quiet quite race radio rain raise random range rate rather re reach\n"
    "react read reader readonly ready real reality realize really reason recall receive\n"
    "recent recognize record recover red reduce refer reference reflect reform refresh region\n"
    "register regular reject relate relationship release religious remain remember remote\n"
    "remove render repeat replace reply report repository represent request require research\n"
    "reset resolve resource respond response rest restart restore result retry return reveal\n"
    "revenue review rich ride right ring rise risk river road rock role roll room root rotate\n"
    "route router row rule runner runtime safe same sample sandbox save scale scan scanner\n"
    "scene schedule schema school science score screen script sea search season seat second\n"
    "secret section sector secure security see seed seek seem seemed seeming seems sell send\n"
    "senior sense sequence series serious serve server service session set setting setup\n"
    "seven several shadow shake shape share she shell shift ship shoot shop short shot should\n"
    "shoulder show side sign signal significant similar simple simply since sincere sing\n"
    "single sister site situation six sixty size skill skin sleep slice slow small smart\n"
    "smile snapshot so social socket soft software soldier solid solution solve some somebody\n"
    "somehow someone something sometime sometimes somewhere son song soon sort sound source\n"
    "south space speak special specific speech speed spend split sport spring staff stage\n"
    "staging stand standard star start state statement station status stay steal step still\n"
    "stock stop storage store story strategy stream street string strong structure student\n"
    "study stuff style subject submit success such sudden suffer suggest suite summer sun\n"
    "supply support sure surface switch symbol sync system table tag take talk target task\n"
    "tax teach teacher team tech technology television tell template ten term test text than\n"
    "thank that the theater their them themselves then thence theory there thereafter thereby\n"
    "therefore therein thereupon these they thick thin thing think third this those though\n"
    "thought thousand thread threat three through throughout throw thru thus ticket time\n"
    "timeout timer title to today together token tonight too tool top total touch toward\n"
    "towards town track trade tradition traffic train transfer travel treat treatment tree\n"
    "trial trigger trip true trust truth try turn tutorial twelve twenty two type un under\n"
    "understand unit until up update upgrade upload upon upper us usage use user username\n"
    "usual utility valid validate value variable various verify version very via victim video\n"
    "view viewer violence virtual visit voice volume vote wait walk wall want war warm warn\n"
    "was watch water way we weapon wear web website week weight well were west western what\n"
    "whatever when whence whenever where whereafter whereas whereby wherein whereupon\n"
    "wherever whether which while white whither who whoever whole whom whose why wide wife\n"
    "wild will win window winter wire wish with within without witness woman wonder word work\n"
    "worker world worry would write writer wrong www yard yeah year yes yet you young your\n"
    "yours yourself yourselves zero zone\n"
;
}  // namespace detail

/// Common-word lexicon used by the readability score.
inline const std::set<std::string>& default_readability_lexicon() {
    static const std::set<std::string> lexicon = parse_word_list(detail::kReadabilityWords);
    return lexicon;
}

}  // namespace secretsift
