#!/usr/bin/env python3
"""Regenerate the shipped prompt bank (src/cefraug/data/prompt_bank.json).

The bank holds 152 Arabic essay prompts spread over 17 topics and three
tiers (Beginner 47, Intermediate 53, Advanced 52). Edit the tables below
and re-run this script; the loader enforces unique ids, so id collisions
surface immediately at load time.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

# topic -> tier -> list of (arabic, english) prompts
PROMPTS: dict[str, dict[str, list[tuple[str, str]]]] = {
    "Culture and Traditions": {
        "Beginner": [
            ("ما هو عيدك المفضل؟ ولماذا تحبه؟",
             "What is your favorite holiday, and why do you love it?"),
        ],
        "Intermediate": [
            ("صف عادة من عادات بلدك وكيف يحافظ الناس عليها.",
             "Describe one of your country's customs and how people preserve it."),
            ("ما أهمية اللباس التقليدي في ثقافتك؟",
             "How important is traditional dress in your culture?"),
            ("تحدث عن مناسبة عائلية تجتمع فيها الأسرة وما الذي يميزها.",
             "Talk about a family occasion where everyone gathers and what makes it special."),
        ],
        "Advanced": [
            ("ناقش دور العادات والتقاليد في تشكيل هوية المجتمع الحديث.",
             "Discuss the role of customs and traditions in shaping modern society's identity."),
            ("كيف يمكن الموازنة بين الحفاظ على التراث ومتطلبات الحياة المعاصرة؟",
             "How can preserving heritage be balanced with the demands of contemporary life?"),
        ],
    },
    "Daily Life": {
        "Beginner": [
            ("صف يومك من الصباح إلى المساء.",
             "Describe your day from morning to evening."),
            ("ماذا تأكل في الفطور عادة؟",
             "What do you usually eat for breakfast?"),
        ],
        "Intermediate": [
            ("كيف تنظم وقتك بين الدراسة والراحة في يوم عادي؟",
             "How do you organize your time between study and rest on a normal day?"),
            ("ما الفرق بين يومك في الإجازة ويومك في أيام الدراسة؟",
             "How does your day differ between holidays and school days?"),
        ],
        "Advanced": [
            ("ناقش كيف غيرت وتيرة الحياة الحديثة تفاصيل اليوم العادي للفرد.",
             "Discuss how the pace of modern life has changed the shape of an ordinary day."),
            ("إلى أي مدى تعكس تفاصيل الحياة اليومية قيم المجتمع؟",
             "To what extent do the details of daily life reflect a society's values?"),
        ],
    },
    "Education": {
        "Beginner": [
            ("ما هي مادتك المفضلة في المدرسة؟ لماذا؟",
             "What is your favorite school subject? Why?"),
            ("صف معلمك المفضل.",
             "Describe your favorite teacher."),
            ("هل تحب الواجبات المنزلية؟ لماذا؟",
             "Do you like homework? Why?"),
        ],
        "Intermediate": [
            ("هل التعلم عن بعد أفضل أم التعلم في الصف؟ اشرح رأيك.",
             "Is remote learning better than classroom learning? Explain your view."),
            ("ما الصفات التي تجعل المعلم ناجحا في عمله؟",
             "What qualities make a teacher successful?"),
            ("كيف تستعد للامتحانات؟ وما النصائح التي تقدمها لزملائك؟",
             "How do you prepare for exams, and what advice would you give classmates?"),
            ("هل يجب أن يتعلم الطلاب لغة أجنبية ثانية؟ ولماذا؟",
             "Should students learn a second foreign language? Why?"),
            ("تحدث عن مهارة تعلمتها خارج المدرسة وكيف أفادتك.",
             "Talk about a skill you learned outside school and how it helped you."),
            ("ما دور المكتبات في حياة الطلاب اليوم؟",
             "What role do libraries play in students' lives today?"),
        ],
        "Advanced": [
            ("ناقش أثر التكنولوجيا على مستقبل التعليم الجامعي.",
             "Discuss the impact of technology on the future of university education."),
            ("هل ينبغي أن يركز التعليم على المهارات العملية أم المعرفة النظرية؟ ناقش.",
             "Should education focus on practical skills or theoretical knowledge? Discuss."),
            ("حلل أسباب تفاوت جودة التعليم بين المناطق المختلفة واقترح حلولا.",
             "Analyze why education quality varies across regions and propose solutions."),
            ("إلى أي مدى يحدد التعليم فرص الفرد في الحياة؟",
             "To what extent does education determine a person's opportunities in life?"),
            ("ناقش مزايا وعيوب التقييم بالامتحانات الموحدة.",
             "Discuss the advantages and drawbacks of standardized examinations."),
            ("كيف يمكن لأنظمة التعليم أن تنمي التفكير النقدي لدى الطلاب؟",
             "How can education systems cultivate critical thinking in students?"),
            ("ناقش العلاقة بين البحث العلمي في الجامعات وتقدم المجتمع.",
             "Discuss the relationship between university research and societal progress."),
            ("هل التعلم مدى الحياة ضرورة في سوق العمل الحديث؟ علل إجابتك.",
             "Is lifelong learning a necessity in the modern job market? Justify your answer."),
        ],
    },
    "Environment": {
        "Beginner": [
            ("صف الطقس في مدينتك.",
             "Describe the weather in your city."),
            ("ماذا تفعل للحفاظ على نظافة حيك؟",
             "What do you do to keep your neighborhood clean?"),
        ],
        "Intermediate": [
            ("ما أسباب التلوث في المدن الكبيرة؟ وكيف نقلل منه؟",
             "What causes pollution in big cities, and how can we reduce it?"),
            ("لماذا تعد إعادة التدوير مهمة؟ وكيف تمارسها في بيتك؟",
             "Why is recycling important, and how do you practice it at home?"),
        ],
        "Advanced": [
            ("ناقش مسؤولية الأفراد والحكومات في مواجهة التغير المناخي.",
             "Discuss the responsibility of individuals and governments in facing climate change."),
            ("حلل التحديات البيئية التي تواجه المدن الساحلية واقترح حلولا مستدامة.",
             "Analyze the environmental challenges facing coastal cities and propose sustainable solutions."),
            ("إلى أي مدى يمكن للطاقة المتجددة أن تحل محل مصادر الطاقة التقليدية؟",
             "To what extent can renewable energy replace traditional energy sources?"),
        ],
    },
    "Future": {
        "Beginner": [
            ("ماذا تريد أن تصبح في المستقبل؟",
             "What do you want to become in the future?"),
        ],
        "Intermediate": [
            ("كيف تتخيل حياتك بعد عشر سنوات؟",
             "How do you imagine your life ten years from now?"),
            ("ما المهن التي تعتقد أنها ستكون مهمة في المستقبل؟ ولماذا؟",
             "Which professions do you think will matter most in the future, and why?"),
        ],
        "Advanced": [
            ("ناقش كيف سيغير الذكاء الاصطناعي سوق العمل في العقود القادمة.",
             "Discuss how artificial intelligence will reshape the job market in the coming decades."),
            ("هل يمكن التخطيط للمستقبل في عالم سريع التغير؟ ناقش برأيك.",
             "Is planning for the future possible in a fast-changing world? Discuss."),
        ],
    },
    "History and Culture": {
        "Beginner": [
            ("اذكر مكانا تاريخيا زرته وماذا رأيت فيه.",
             "Mention a historical place you visited and what you saw there."),
            ("من هي الشخصية التاريخية التي تحبها؟ لماذا؟",
             "Which historical figure do you admire? Why?"),
        ],
        "Intermediate": [
            ("لماذا يجب أن نتعلم التاريخ؟ اشرح بأمثلة.",
             "Why should we study history? Explain with examples."),
            ("تحدث عن معلم تاريخي في بلدك وأهميته للزوار.",
             "Talk about a historical landmark in your country and its importance to visitors."),
        ],
        "Advanced": [
            ("ناقش دور المتاحف في حفظ الذاكرة الثقافية للأمم.",
             "Discuss the role of museums in preserving nations' cultural memory."),
            ("كيف تسهم معرفة التاريخ في فهم قضايا الحاضر؟",
             "How does knowing history help us understand present-day issues?"),
        ],
    },
    "Hobbies": {
        "Beginner": [
            ("تحدث عن هوايتك المفضلة ومتى تمارسها.",
             "Talk about your favorite hobby and when you practice it."),
            ("ماذا تحب أن تفعل في وقت الفراغ؟",
             "What do you like to do in your free time?"),
            ("هل تحب الرسم أم الموسيقى أكثر؟ لماذا؟",
             "Do you prefer drawing or music? Why?"),
        ],
        "Intermediate": [
            ("كيف بدأت هوايتك المفضلة؟ وماذا تعلمت منها؟",
             "How did your favorite hobby start, and what has it taught you?"),
            ("هل يمكن أن تتحول الهواية إلى مهنة؟ اشرح رأيك بأمثلة.",
             "Can a hobby become a profession? Explain your view with examples."),
        ],
        "Advanced": [
            ("ناقش أثر الهوايات على الصحة النفسية والتوازن في الحياة.",
             "Discuss how hobbies affect mental health and life balance."),
            ("كيف تعبر الهوايات عن شخصية صاحبها؟ ناقش.",
             "How do hobbies express their owner's personality? Discuss."),
        ],
    },
    "Imaginary": {
        "Beginner": [
            ("تخيل أنك تستطيع الطيران. ماذا ستفعل؟",
             "Imagine you could fly. What would you do?"),
            ("تخيل أنك وجدت كنزا في حديقة بيتك. ماذا ستفعل؟",
             "Imagine you found a treasure in your garden. What would you do?"),
            ("لو كان عندك حيوان أليف يتكلم، ماذا ستسأله؟",
             "If you had a talking pet, what would you ask it?"),
            ("تخيل يوما بدون هاتف. كيف سيكون؟",
             "Imagine a day without a phone. What would it be like?"),
            ("لو استطعت زيارة أي مكان في العالم، أين ستذهب؟",
             "If you could visit anywhere in the world, where would you go?"),
        ],
        "Intermediate": [
            ("تخيل أنك أصبحت مدير مدرستك ليوم واحد. ماذا ستغير؟",
             "Imagine being your school's principal for one day. What would you change?"),
            ("لو استطعت العيش في زمن آخر، أي زمن تختار؟ ولماذا؟",
             "If you could live in another era, which would you choose, and why?"),
        ],
        "Advanced": [
            ("تخيل مدينة مثالية في المستقبل وصف أنظمتها وحياة سكانها.",
             "Imagine an ideal future city; describe its systems and its residents' lives."),
            ("لو ملكت القدرة على حل مشكلة عالمية واحدة، أيها تختار؟ ناقش اختيارك.",
             "If you could solve one global problem, which would you choose? Discuss."),
        ],
    },
    "Life/Time Management": {
        "Beginner": [
            ("متى تستيقظ ومتى تنام؟ صف جدولك اليومي.",
             "When do you wake up and sleep? Describe your daily schedule."),
            ("ماذا تفعل بعد المدرسة كل يوم؟",
             "What do you do after school every day?"),
            ("كيف تقضي عطلة نهاية الأسبوع؟",
             "How do you spend your weekend?"),
            ("هل تحب الاستيقاظ مبكرا؟ لماذا؟",
             "Do you like waking up early? Why?"),
        ],
        "Intermediate": [
            ("كيف توازن بين الدراسة والرياضة والأصدقاء؟",
             "How do you balance study, sport and friends?"),
            ("ما النصائح التي تساعد على تنظيم الوقت بفعالية؟",
             "What advice helps people manage time effectively?"),
            ("هل تؤجل أعمالك أحيانا؟ وكيف تتغلب على التأجيل؟",
             "Do you sometimes procrastinate? How do you overcome it?"),
            ("صف أسبوعا مزدحما مررت به وكيف أدرت مهامه.",
             "Describe a busy week you had and how you managed its tasks."),
        ],
        "Advanced": [
            ("ناقش أثر الإدارة الجيدة للوقت على النجاح المهني والشخصي.",
             "Discuss how good time management shapes professional and personal success."),
            ("هل تحقيق التوازن بين العمل والحياة ممكن في عصرنا؟ ناقش.",
             "Is work-life balance achievable in our era? Discuss."),
        ],
    },
    "Personal Experiences": {
        "Beginner": [
            ("تحدث عن يوم لا تنساه.",
             "Talk about an unforgettable day."),
            ("صف رحلة قمت بها مع عائلتك.",
             "Describe a trip you took with your family."),
            ("تحدث عن هدية أسعدتك كثيرا.",
             "Talk about a gift that made you very happy."),
            ("صف أول يوم لك في المدرسة.",
             "Describe your first day at school."),
            ("تحدث عن طعام جربته لأول مرة.",
             "Talk about a food you tried for the first time."),
            ("صف زيارة قمت بها لبيت جدك.",
             "Describe a visit to your grandfather's house."),
            ("تحدث عن صديق قديم تتذكره دائما.",
             "Talk about an old friend you always remember."),
        ],
        "Intermediate": [
            ("تحدث عن تجربة صعبة مررت بها وماذا تعلمت منها.",
             "Talk about a difficult experience and what it taught you."),
            ("صف موقفا غيّر طريقة تفكيرك في شيء ما.",
             "Describe a situation that changed the way you think about something."),
        ],
        "Advanced": [
            ("حلل تجربة شخصية أثرت في اختياراتك المستقبلية وبين أثرها.",
             "Analyze a personal experience that shaped your future choices and show its impact."),
            ("ناقش كيف تصقل التجارب الشخصية شخصية الإنسان وقيمه.",
             "Discuss how personal experiences refine a person's character and values."),
        ],
    },
    "Relations": {
        "Beginner": [
            ("صف أفراد عائلتك.",
             "Describe your family members."),
            ("من هو صديقك المقرب؟ صفه.",
             "Who is your closest friend? Describe them."),
            ("ماذا تفعل مع أصدقائك في العطلة؟",
             "What do you do with your friends on holidays?"),
            ("كيف تساعد والديك في البيت؟",
             "How do you help your parents at home?"),
        ],
        "Intermediate": [
            ("ما صفات الصديق الحقيقي برأيك؟ اشرح مع أمثلة.",
             "What makes a true friend, in your opinion? Explain with examples."),
            ("كيف نحل الخلافات بين الأصدقاء؟",
             "How should disagreements between friends be resolved?"),
        ],
        "Advanced": [
            ("ناقش أثر وسائل التواصل الحديثة على العلاقات الأسرية.",
             "Discuss the effect of modern communication tools on family relationships."),
            ("كيف تتغير علاقات الفرد مع تقدمه في العمر؟ ناقش.",
             "How do a person's relationships change with age? Discuss."),
        ],
    },
    "School Life": {
        "Beginner": [
            ("صف مدرستك وصفوفها.",
             "Describe your school and its classrooms."),
            ("ماذا تفعل في الاستراحة المدرسية؟",
             "What do you do during the school break?"),
            ("ما هو يومك المفضل في المدرسة؟ لماذا؟",
             "What is your favorite school day? Why?"),
            ("صف فصلك وزملاءك.",
             "Describe your class and classmates."),
        ],
        "Intermediate": [
            ("ما الأنشطة المدرسية التي تشارك فيها؟ وماذا تضيف إليك؟",
             "Which school activities do you join, and what do they add to you?"),
            ("لو استطعت تغيير شيء واحد في مدرستك، ماذا تغير؟",
             "If you could change one thing about your school, what would it be?"),
        ],
        "Advanced": [
            ("ناقش دور الأنشطة اللاصفية في بناء شخصية الطالب.",
             "Discuss the role of extracurricular activities in building a student's character."),
            ("كيف تؤثر البيئة المدرسية على التحصيل الدراسي؟ حلل العوامل.",
             "How does the school environment affect achievement? Analyze the factors."),
        ],
    },
    "Sport and Health": {
        "Beginner": [
            ("ما هي رياضتك المفضلة؟ ومتى تمارسها؟",
             "What is your favorite sport, and when do you practice it?"),
            ("ماذا تأكل لتبقى بصحة جيدة؟",
             "What do you eat to stay healthy?"),
        ],
        "Intermediate": [
            ("لماذا تعد الرياضة مهمة للشباب؟ اشرح بالأمثلة.",
             "Why is sport important for young people? Explain with examples."),
            ("كيف يؤثر النوم الجيد على صحة الطالب ودراسته؟",
             "How does good sleep affect a student's health and studies?"),
            ("ما الفرق بين الرياضة الفردية والرياضة الجماعية؟ وأيهما تفضل؟",
             "How do individual and team sports differ, and which do you prefer?"),
        ],
        "Advanced": [
            ("ناقش العلاقة بين نمط الحياة الحديث وانتشار الأمراض المزمنة.",
             "Discuss the link between modern lifestyles and the spread of chronic disease."),
        ],
    },
    "Technology and Media": {
        "Beginner": [
            ("ما هو جهازك المفضل؟ لماذا تحبه؟",
             "What is your favorite device? Why do you like it?"),
            ("ماذا تشاهد على التلفاز؟",
             "What do you watch on television?"),
        ],
        "Intermediate": [
            ("ما فوائد الهاتف الذكي وأضراره في حياة الطلاب؟",
             "What are the benefits and harms of smartphones in students' lives?"),
            ("كيف غيّر الإنترنت طريقة تعلمنا؟",
             "How has the internet changed the way we learn?"),
            ("هل تثق بالأخبار التي تقرؤها على وسائل التواصل؟ لماذا؟",
             "Do you trust the news you read on social media? Why?"),
            ("ما أثر الألعاب الإلكترونية على الشباب؟",
             "What effect do video games have on young people?"),
            ("كيف تستخدم التكنولوجيا في دراستك اليومية؟",
             "How do you use technology in your daily studies?"),
            ("هل وسائل التواصل الاجتماعي تقرب الناس أم تبعدهم؟ اشرح.",
             "Does social media bring people closer or push them apart? Explain."),
            ("ما القواعد التي تضعها لنفسك عند استخدام الإنترنت؟",
             "What rules do you set for yourself when using the internet?"),
            ("صف تطبيقا تستخدمه كثيرا ولماذا تجده مفيدا.",
             "Describe an app you use a lot and why you find it useful."),
        ],
        "Advanced": [
            ("ناقش أثر الإعلام الرقمي في تشكيل الرأي العام.",
             "Discuss the impact of digital media on shaping public opinion."),
            ("حلل مخاطر انتشار المعلومات المضللة وسبل مواجهتها.",
             "Analyze the dangers of misinformation and ways to counter it."),
            ("إلى أي مدى يهدد الذكاء الاصطناعي الخصوصية الفردية؟ ناقش.",
             "To what extent does artificial intelligence threaten individual privacy? Discuss."),
            ("ناقش مستقبل الصحافة التقليدية في ظل المنصات الرقمية.",
             "Discuss the future of traditional journalism amid digital platforms."),
            ("كيف يعيد الاقتصاد الرقمي تشكيل مفهوم العمل؟ حلل.",
             "How is the digital economy reshaping the concept of work? Analyze."),
            ("ناقش أخلاقيات جمع البيانات الشخصية واستخدامها تجاريا.",
             "Discuss the ethics of collecting personal data and using it commercially."),
        ],
    },
    "Travel and Experience": {
        "Beginner": [
            ("صف رحلة قصيرة قمت بها مؤخرا.",
             "Describe a short trip you took recently."),
        ],
        "Intermediate": [
            ("لماذا يسافر الناس؟ وما الذي تتعلمه من السفر؟",
             "Why do people travel, and what does travel teach you?"),
            ("صف مدينة زرتها وأعجبتك وما الذي يميزها.",
             "Describe a city you visited and liked, and what makes it special."),
        ],
        "Advanced": [
            ("ناقش أثر السياحة على اقتصاد الدول وثقافتها المحلية.",
             "Discuss the impact of tourism on national economies and local cultures."),
        ],
    },
    "Politics and Government": {
        "Beginner": [
            ("من يدير مدينتك؟ وماذا يفعل للناس؟",
             "Who runs your city, and what do they do for people?"),
            ("ما هي الخدمات التي تقدمها الحكومة في حيك؟",
             "What services does the government provide in your neighborhood?"),
        ],
        "Intermediate": [
            ("ما دور البلدية في تحسين حياة السكان؟ أعط أمثلة.",
             "What is the municipality's role in improving residents' lives? Give examples."),
            ("لماذا ندفع الضرائب؟ وكيف يستفيد منها المجتمع؟",
             "Why do we pay taxes, and how does society benefit from them?"),
        ],
        "Advanced": [
            ("ناقش أهمية المشاركة المجتمعية في صنع القرار العام.",
             "Discuss the importance of community participation in public decision-making."),
            ("حلل العلاقة بين الشفافية الحكومية وثقة المواطنين.",
             "Analyze the relationship between government transparency and citizens' trust."),
            ("ناقش دور المؤسسات الدولية في حل النزاعات بين الدول.",
             "Discuss the role of international institutions in resolving disputes between states."),
            ("إلى أي مدى ينبغي للحكومات تنظيم الاقتصاد الرقمي؟",
             "To what extent should governments regulate the digital economy?"),
            ("ناقش التحديات التي تواجه الخدمات العامة في المدن المتنامية.",
             "Discuss the challenges facing public services in growing cities."),
            ("كيف يمكن للسياسات العامة أن تعزز العدالة الاجتماعية؟ ناقش.",
             "How can public policy advance social justice? Discuss."),
            ("ناقش أثر القيادة الرشيدة في نهضة الدول وتقدمها.",
             "Discuss the impact of good leadership on nations' rise and progress."),
        ],
    },
    "Social Issues": {
        "Beginner": [
            ("كيف تساعد جيرانك؟",
             "How do you help your neighbors?"),
            ("ماذا تفعل عندما ترى شخصا يحتاج المساعدة؟",
             "What do you do when you see someone who needs help?"),
        ],
        "Intermediate": [
            ("ما أسباب انتشار العمل التطوعي بين الشباب؟ وما فوائده؟",
             "Why is volunteering spreading among young people, and what are its benefits?"),
            ("كيف نعامل كبار السن في مجتمعنا؟ ولماذا يستحقون الرعاية؟",
             "How do we treat the elderly in our society, and why do they deserve care?"),
            ("ما أثر الازدحام المروري على حياة الناس في المدن؟",
             "How does traffic congestion affect people's lives in cities?"),
            ("لماذا يعد التسامح مهما في المجتمعات المتنوعة؟",
             "Why is tolerance important in diverse societies?"),
            ("كيف يمكن للشباب المساهمة في تطوير مجتمعهم؟",
             "How can young people contribute to developing their community?"),
            ("ما أسباب البطالة بين الخريجين الجدد؟ وكيف نعالجها؟",
             "What causes unemployment among new graduates, and how can it be addressed?"),
            ("كيف نشجع الناس على القراءة في مجتمعنا؟",
             "How can we encourage reading in our society?"),
        ],
        "Advanced": [
            ("ناقش أسباب الفجوة بين الأجيال وسبل تجسيرها.",
             "Discuss the causes of the generation gap and ways to bridge it."),
            ("حلل ظاهرة الهجرة من الريف إلى المدينة وآثارها الاجتماعية.",
             "Analyze rural-to-urban migration and its social effects."),
            ("ناقش دور المرأة في سوق العمل والتحديات التي تواجهها.",
             "Discuss women's role in the labor market and the challenges they face."),
            ("إلى أي مدى تسهم الجمعيات الأهلية في معالجة المشكلات الاجتماعية؟",
             "To what extent do civil associations help address social problems?"),
            ("ناقش العلاقة بين العدالة الاجتماعية والاستقرار المجتمعي.",
             "Discuss the relationship between social justice and social stability."),
            ("حلل أثر الفقر على فرص التعليم واقترح سياسات للحد منه.",
             "Analyze how poverty affects educational opportunity and propose policies to reduce it."),
        ],
    },
}

TIER_CODE = {"Beginner": "b", "Intermediate": "i", "Advanced": "a"}


def slugify(topic: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", topic.lower()).strip("-")


def build() -> list[dict]:
    entries = []
    for topic, tiers in PROMPTS.items():
        for tier, prompts in tiers.items():
            for i, (ar, en) in enumerate(prompts, start=1):
                entries.append({
                    "id": f"{slugify(topic)}-{TIER_CODE[tier]}{i:02d}",
                    "topic": topic,
                    "tier": tier,
                    "text_ar": ar,
                    "text_en": en,
                })
    return entries


def main():
    entries = build()
    by_tier = {"Beginner": 0, "Intermediate": 0, "Advanced": 0}
    for e in entries:
        by_tier[e["tier"]] += 1
    print(f"total={len(entries)} tiers={by_tier}")
    assert len(entries) == 152, len(entries)
    assert (by_tier["Beginner"], by_tier["Intermediate"], by_tier["Advanced"]) == (47, 53, 52)
    out = Path(__file__).resolve().parents[1] / "src" / "cefraug" / "data" / "prompt_bank.json"
    out.write_text(json.dumps(entries, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
