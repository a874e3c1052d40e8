def answer_question(video, possible_answers):
    summary = video.get_summary()
    context = {"summary": summary}
    answer = video.choose_option("which option best describes the overall narrative of the video?", context, possible_answers)
    return answer
