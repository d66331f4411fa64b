//! Precomputed `ln P(ξ_d > s)` on the grids `s_i = s_max (i/N)²`.
//! Generated by `examples/xi_table.rs`.

pub(super) const XI2_S_MAX: f64 = 0.4410653269775676;
#[rustfmt::skip]
pub(super) const XI2_LOG_TAIL: [f64; 241] = [
    0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0, 0.0,
    -7.3742012499044e-11, -2.0805857058875776e-9, -3.1315857731040545e-8, -3.075904981935262e-7,
    -2.1338748595639177e-6, -1.1106082684482933e-5, -4.551899472401775e-5, -0.0001528001621179641,
    -0.0004337893208284123, -0.001069299563230381, -0.0023390953857857157, -0.004623790381816679,
    -0.008385650030426304, -0.014131800589396127, -0.022368858832248612, -0.03355932130811668,
    -0.04808764746848992, -0.0662398472621723, -0.0881965307178193, -0.11403687995086406,
    -0.14375000789368583, -0.17725027794504367, -0.21439385150779253, -0.25499458893526794,
    -0.29883820821474194, -0.345694203329291, -0.3953254288083129, -0.4474954991921394,
    -0.5019742750499872, -0.5585417508881821, -0.616990656218279, -0.6771280514587983,
    -0.738776159725191, -0.801772632697173, -0.8659704084926423, -0.9312372841515767,
    -0.9974552957369425, -1.0645199751160916, -1.1323395336688606, -1.2008340087576113,
    -1.2699343980282005, -1.3395817987648777, -1.4097265639514516, -1.480327482843656,
    -1.5513509912768686, -1.6227704152510083, -1.6945652502629458, -1.766720478176699,
    -1.8392259229729153, -1.9120756463891917, -1.9852673841785071, -2.05880202343064,
    -2.1326831211009134, -2.206916463566366, -2.281509666687801, -2.3564718155087374,
    -2.4318131423841285, -2.5075447420164325, -2.5836783215942845, -2.660225983989143,
    -2.7372000417813886, -2.81461285976061, -2.8924767234595925, -2.9708037312450646,
    -3.0496057075255516, -3.12889413469651, -3.2086801015051987, -3.288974265682859,
    -3.3697868288216912, -3.4511275215886057, -3.5330055976224486, -3.6154298345271436,
    -3.698408540620412, -3.781949566228573, -3.866060318449342, -3.9507477785256553,
    -4.0360185209944035, -4.1218787340337615, -4.208334240403993, -4.295390518595542,
    -4.383052723812927, -4.471325708493668, -4.560214042230777, -4.649722030826596,
    -4.739853734487614, -4.830612985028621, -4.9220034020226615, -5.014028407973953,
    -5.106691242449261, -5.199994975182314, -5.293942518249912, -5.388536637331047,
    -5.483779962069455, -5.579674995616792, -5.67622412342631, -5.77342962133694,
    -5.871293662987708, -5.969818326621904, -6.069005601334353, -6.168857392812145,
    -6.2693755286063295, -6.370561762977752, -6.472417781349832, -6.574945204407807,
    -6.678145591875805, -6.782020446001124, -6.886571214766439, -6.991799294872876,
    -7.097706034484124, -7.204292735785184, -7.311560657350375, -7.419511016345189,
    -7.528144990576613, -7.637463720410456, -7.747468310553975, -7.858159831730639,
    -7.969539322240838, -8.08160778940815, -8.194366210938178, -8.307815536216541,
    -8.421956687573482, -8.536790561479293, -8.652318029477303, -8.76853993912719,
    -8.885457115123447, -9.00307036044734, -9.12138045680175, -9.24038816521268,
    -9.36009422771303, -9.480499367515414, -9.601604288942486, -9.723409679932441,
    -9.845916211066534, -9.969124536163758, -10.09303529498256, -10.217649109930463,
    -10.34296659116138, -10.468988332714295, -10.59571491655937, -10.72314691018261,
    -10.851284869673698, -10.98012933708633, -11.109680844975781, -11.239939910632367,
    -11.370907045547774, -11.502582743336667, -11.634967494273855, -11.768061774039275,
    -11.90186604710182, -12.036380775792756, -12.17160640362143, -12.307543368963556,
    -12.444192107142634, -12.581553036029348, -12.719626565507715, -12.858413105600755,
    -12.997913056380916, -13.138126802772442, -13.27905472314598, -13.420697196270583,
    -13.563054594627147, -13.706127279479217, -13.849915602407718, -13.994419908167176,
    -14.139640538393568, -14.285577829388387, -14.432232112125016, -14.579603710803976,
    -14.727692943314553, -14.87650012454069, -15.026025558404271, -15.176269547746875,
    -15.327232389462033, -15.47891437368701, -15.631315792585152, -15.78443692563275,
    -15.938278058017021, -16.092839462901622, -16.248121398708108, -16.404124115373953,
    -16.5608478393294, -16.71829283794681, -16.876459390659864, -17.035347858642048,
    -17.194958491810755, -17.355291285764377, -17.516346402377618, -17.678124297134215,
    -17.840625634737684, -18.00385001569397, -18.16779719603695, -18.332468601638418,
    -18.49786435303223, -18.663983014606007, -18.83082644582376, -18.99839544642794,
    -19.166686864055674, -19.33570555513097, -19.50544811959699, -19.675915148287945,
    -19.84711071830283, -20.01902715071522, -20.191675794294788, -20.365041784142516,
    -20.539144019403945, -20.713962144925173, -20.889519713552676, -21.065787650275972,
    -21.242798536300207, -21.420527547704477, -21.59898112468922, -21.778178816657636,
    -21.95807351925667, -22.138724748437575, -22.320107637962632, -22.5021689059694,
    -22.685010318545505,
];
pub(super) const XI3_S_MAX: f64 = 0.046209067847855716;
#[rustfmt::skip]
pub(super) const XI3_LOG_TAIL: [f64; 241] = [
    0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0, 0.0,
    -2.8355096048930517e-13, -6.838973831693303e-13, -1.0563772079313944e-12, -1.2980727603925756e-12,
    -1.2950751582260838e-12, -8.513190152829324e-13, -2.366995488501114e-13, 0.0,
    0.0, 0.0, 0.0, -6.170619570868523e-13,
    -1.3045120539354097e-12, -1.088684697948021e-12, 0.0, 0.0,
    0.0, -1.754152378907901e-13, -1.3944401189301688e-12, -9.404699241604124e-13,
    0.0, 0.0, -7.527312106958844e-14, -1.6594503549085984e-12,
    -4.788391905209446e-13, 0.0, 0.0, -1.7724710588156332e-12,
    -6.938893903909636e-13, 0.0, 0.0, -2.230882145684278e-12,
    0.0, 0.0, -2.3940849303045532e-12, -1.1063150395845957e-11,
    -2.4890312036773946e-10, -3.893627206017055e-9, -4.227905026635455e-8, -3.3805059137117636e-7,
    -2.073264733934911e-6, -1.010414482958057e-5, -4.033929297825244e-5, -0.00013542952473936582,
    -0.0003910846935116597, -0.0009905983711480935, -0.0022385818656692085, -0.004580648931188965,
    -0.00859761898108318, -0.014970749390245846, -0.024424508288949303, -0.03766031323343479,
    -0.05529574594357973, -0.0778197989383491, -0.10556860513799403, -0.13872065144524026,
    -0.1773071427417721, -0.22123205771429882, -0.2702968633117573, -0.3242260348084334,
    -0.3826908594344486, -0.44533015081737093, -0.5117673477328561, -0.5816240188261768,
    -0.6545301033054524, -0.7301313564999509, -0.8080945000218631, -0.8881105456898241,
    -0.9698967021415013, -1.0531972034873327, -1.1377833317067656, -1.2234528451728002,
    -1.310028976162012, -1.3973591216468584, -1.4853133216716476, -1.5737825981390998,
    -1.6626772106349452, -1.7519248747246163, -1.841468979790343, -1.931266836937011,
    -2.0212879827213506, -2.111512559549269, -2.201929789748638, -2.29253655633779,
    -2.3833360994500703, -2.4743368341798075, -2.565551291975384, -2.656995184680777,
    -2.7486865880651346, -2.8406452392043255, -2.9328919404772558, -3.0254480620265225,
    -3.1183351334821494, -3.2115745153768884, -3.3051871409372535, -3.3991933190023014,
    -3.493612589127625, -3.588463620770793, -3.683764149197272, -3.7795309412958398,
    -3.875779785293828, -3.972525499301144, -4.069781954310793, -4.167562107826332,
    -4.265878044929974, -4.364741024277268, -4.46416152700778, -4.564149306908234,
    -4.664713440495314, -4.765862376043856, -4.8676039808910065, -4.969945586553384,
    -5.072894031329457, -5.176455700176, -5.280636561764665, -5.385442202728842,
    -5.490877859177185, -5.596948445590875, -5.703658581239898, -5.811012614267099,
    -5.919014643597767, -6.027668538839151, -6.136977958336916, -6.246946365552637,
    -6.357577043913654, -6.468873110286583, -6.580837527198736, -6.693473113939348,
    -6.806782556648737, -6.9207684174932, -7.035433143028188, -7.150779071823411,
    -7.266808441427911, -7.383523394747855, -7.500925985882694, -7.619018185503795,
    -7.73780188577284, -7.85727890489419, -7.977450991313224, -8.098319827592592,
    -8.219887034003989, -8.342154171867536, -8.465122746639388, -8.588794210774072,
    -8.713169966410259, -8.838251367829102, -8.964039723766211, -9.090536299574202,
    -9.21774231931597, -9.345658967790424, -9.47428739247575, -9.603628705356627,
    -9.733683984400908, -9.86445427468299, -9.995940589177382, -10.128143909810229,
    -10.261065189635111, -10.394705355569972, -10.529065310741592, -10.664145933493215,
    -10.799948074328457, -10.936472555294337, -11.073720176852397, -11.211691727228356,
    -11.350387979548898, -11.489809675690552, -11.62995752243951, -11.770832218989451,
    -11.912434475482469, -12.054764974266792, -12.197824335108978, -12.341613176600665,
    -12.48613217098855, -12.631381940335153, -12.777362997601024, -12.92407593202946,
    -13.071521416713107, -13.219699916517486, -13.368611880262948, -13.518258032469605,
    -13.668638829796283, -13.81975455782147, -13.971606032228095, -14.124193646955984,
    -14.277517537395202, -14.431578744805543, -14.586377338572635, -14.741913552927631,
    -14.898188666624465, -15.055201968868753, -15.212954711237987, -15.371447305673197,
    -15.53067902606804, -15.69065239221306, -15.851365106907341, -16.012820136115682,
    -16.175015997259614, -16.337953603408245, -16.501634443258936, -16.666055801634176,
    -16.83122312015366, -16.997129585156113, -17.163784693498602, -17.331177519798974,
    -17.49932184743442, -17.66820205946018, -17.837837128363166, -18.008205718185497,
    -18.179332790958977, -18.35119141680205, -18.523810065643254, -18.69716293346447,
    -18.871269027474526, -19.046124712738685, -19.221711027267734, -19.398077584217443,
    -19.575143255074323, -19.75301189163178, -19.931585317571844, -20.11091348345063,
    -20.2910406442738, -20.471813322401708, -20.65344818660715, -20.8357836483002,
    -21.018789055256978, -21.202737100521478, -21.387260793928373, -21.57250542823148,
    -21.7587823774502, -21.945510738411365, -22.13292924692285, -22.321578893213463,
    -22.510614501356784,
];
